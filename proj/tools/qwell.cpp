// qwell: estimate a market potential from EOD data, solve the infinite-well
// Schrodinger problem on it, and run barrier/breakout/tunneling analysis.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qwell/qwell.hpp"

namespace fs = std::filesystem;

namespace {

struct PipelineOpts {
    std::string input;
    std::int64_t free_float = 0;
    int grid_k = 200;
    std::optional<double> grid_min;
    std::optional<double> grid_max;
    std::string decay = "const";
    std::optional<double> lambda;
    std::optional<double> g_a;
    std::optional<double> g_b;
    double sigma_hold = 5.0;
    std::string intraday = "close";
    std::optional<int> horizon;
    std::size_t vol_window = 20;
    std::string smoothing = "count";
    int window_radius = 0;
    std::string out_dir = ".";
    std::string format = "csv";
};

struct SolverOpts {
    double hbar_eff = 1.0;
    double mass = 1.0;
    double potential_scale = 1.0;
    int states = 1;
    std::string forecast = "ground";
    double temperature = 1.0;
};

void add_pipeline_options(CLI::App* cmd, PipelineOpts& o) {
    cmd->add_option("--input", o.input, "EOD CSV file")->required();
    cmd->add_option("--free-float", o.free_float, "free float in shares")->required();
    cmd->add_option("--grid-k", o.grid_k, "number of price bins");
    cmd->add_option("--grid-min", o.grid_min, "explicit lower grid bound");
    cmd->add_option("--grid-max", o.grid_max, "explicit upper grid bound");
    cmd->add_option("--decay", o.decay, "decay law")
        ->check(CLI::IsMember({"const", "vol", "gauss"}));
    cmd->add_option("--lambda", o.lambda, "constant decay rate (default: from turnover)");
    cmd->add_option("--g-a", o.g_a, "intercept of lambda = a + b/sigma");
    cmd->add_option("--g-b", o.g_b, "slope of lambda = a + b/sigma");
    cmd->add_option("--sigma-hold", o.sigma_hold, "Gaussian holding width in days");
    cmd->add_option("--intraday", o.intraday, "intraday volume distribution")
        ->check(CLI::IsMember({"close", "uniform", "gauss"}));
    cmd->add_option("--horizon", o.horizon, "accumulation horizon T (default: rotation period)");
    cmd->add_option("--vol-window", o.vol_window, "rolling volatility window");
    cmd->add_option("--smoothing", o.smoothing, "potential construction")
        ->check(CLI::IsMember({"count", "price"}));
    cmd->add_option("--window-radius", o.window_radius, "extra bins each side in the smoothing window");
    cmd->add_option("--out", o.out_dir, "output directory");
    cmd->add_option("--format", o.format, "output format")
        ->check(CLI::IsMember({"csv", "json"}));
}

void add_solver_options(CLI::App* cmd, SolverOpts& o) {
    cmd->add_option("--hbar", o.hbar_eff, "effective hbar");
    cmd->add_option("--mass", o.mass, "effective mass");
    cmd->add_option("--potential-scale", o.potential_scale, "energy multiplier on normalized V");
    cmd->add_option("--states", o.states, "number of eigenstates");
    cmd->add_option("--forecast", o.forecast, "forecast mode")
        ->check(CLI::IsMember({"ground", "boltzmann"}));
    cmd->add_option("--temperature", o.temperature, "Boltzmann temperature");
}

qwell::MarketSeries load_series(const PipelineOpts& o) {
    std::ifstream in(o.input, std::ios::binary);
    if (!in) qwell::fail("io_error", "cannot open input file: " + o.input);
    return qwell::validate_series(qwell::parse_eod_csv(in), o.free_float);
}

/// Auto bounds: [min low, max high] padded by one bin on each side.
qwell::PriceGrid make_grid(const PipelineOpts& o, const qwell::MarketSeries& series) {
    if (o.grid_min && o.grid_max) {
        return qwell::build_price_grid(*o.grid_min, *o.grid_max, o.grid_k);
    }
    if (o.grid_min || o.grid_max) {
        qwell::fail("bad_argument", "--grid-min and --grid-max must be given together");
    }
    double lo = series.bars.front().low, hi = series.bars.front().high;
    for (const auto& b : series.bars) {
        lo = std::min(lo, b.low);
        hi = std::max(hi, b.high);
    }
    if (o.grid_k < 3) qwell::fail("bad_argument", "auto grid bounds need --grid-k >= 3");
    double span = hi - lo;
    if (span <= 0) span = std::max(1e-6, 0.02 * hi);
    const double bin = span / (o.grid_k - 2);
    return qwell::build_price_grid(lo - bin, hi + bin, o.grid_k);
}

qwell::DecayLaw make_law(const PipelineOpts& o, const qwell::MarketSeries& series) {
    if (o.decay == "const") {
        double lambda;
        if (o.lambda) {
            lambda = *o.lambda;
        } else {
            const double v_m = qwell::mean_daily_volume(series, series.bars.size());
            lambda = qwell::decay_constant(
                qwell::turnover_probability(v_m, static_cast<double>(series.free_float)));
        }
        return qwell::ConstantExponential{lambda};
    }
    if (o.decay == "vol") {
        if (o.g_a && o.g_b) return qwell::VolatilityLinked{*o.g_a, *o.g_b};
        if (o.g_a || o.g_b) qwell::fail("bad_argument", "--g-a and --g-b must be given together");
        auto [a, b] = qwell::calibrate_g(series, o.vol_window);
        return qwell::VolatilityLinked{a, b};
    }
    return qwell::GaussianHolding{o.sigma_hold};
}

qwell::IntradayMode make_mode(const PipelineOpts& o) {
    if (o.intraday == "close") return qwell::IntradayMode::ClosePoint;
    if (o.intraday == "uniform") return qwell::IntradayMode::Uniform;
    return qwell::IntradayMode::TruncatedGaussian;
}

qwell::ModelParams make_params(const SolverOpts& o) {
    qwell::ModelParams p;
    p.hbar_eff = o.hbar_eff;
    p.mass = o.mass;
    p.potential_scale = o.potential_scale;
    return p;
}

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) qwell::fail("io_error", "cannot write " + path.string());
    out << content;
}

struct PipelineResult {
    qwell::MarketSeries series;
    qwell::PriceGrid grid;
    qwell::DecayLaw law;
    qwell::HeldSharesProfile held;
    qwell::PotentialProfile potential;
};

PipelineResult run_pipeline(const PipelineOpts& o) {
    PipelineResult r{load_series(o), {}, qwell::ConstantExponential{}, {}, {}};
    r.grid = make_grid(o, r.series);
    r.law = make_law(o, r.series);
    r.held = qwell::accumulate_held_shares(r.series, r.grid, r.law, make_mode(o), o.horizon,
                                           o.vol_window);
    const auto smoothing = o.smoothing == "price" ? qwell::PotentialSmoothing::AsWritten
                                                  : qwell::PotentialSmoothing::PureCount;
    r.potential = qwell::potential_from_held_shares(r.held, smoothing, o.window_radius);
    return r;
}

int cmd_ingest(const PipelineOpts& o) {
    auto series = load_series(o);
    if (series.bars.empty()) qwell::fail("bad_argument", "input has no bars");
    const double v_m = qwell::mean_daily_volume(series, series.bars.size());
    const double p = qwell::turnover_probability(v_m, static_cast<double>(series.free_float));
    const double lambda = qwell::decay_constant(p);
    const int rotation = qwell::free_float_rotation_period(series);
    if (o.format == "json") {
        nlohmann::json report = {{"bars", series.bars.size()},
                                 {"first_date", qwell::to_string(series.bars.front().date)},
                                 {"last_date", qwell::to_string(series.bars.back().date)},
                                 {"free_float", series.free_float},
                                 {"mean_daily_volume", v_m},
                                 {"rotation_period", rotation},
                                 {"turnover_probability", p},
                                 {"lambda", lambda}};
        std::cout << report.dump(2) << "\n";
    } else {
        std::cout << "bars: " << series.bars.size() << "\n"
                  << "range: " << qwell::to_string(series.bars.front().date) << " .. "
                  << qwell::to_string(series.bars.back().date) << "\n"
                  << "free float: " << series.free_float << "\n"
                  << "mean daily volume: " << qwell::format_double(v_m) << "\n"
                  << "rotation period T: " << rotation << "\n"
                  << "turnover P: " << qwell::format_double(p) << "\n"
                  << "lambda: " << qwell::format_double(lambda) << "\n";
    }
    return 0;
}

int cmd_potential(const PipelineOpts& o) {
    auto r = run_pipeline(o);
    const fs::path dir(o.out_dir);
    if (o.format == "json") {
        write_file(dir / "held_shares.json", qwell::to_json(r.held).dump(2) + "\n");
        write_file(dir / "potential.json", qwell::to_json(r.potential).dump(2) + "\n");
    } else {
        write_file(dir / "held_shares.csv", qwell::to_csv(r.held));
        write_file(dir / "potential.csv", qwell::to_csv(r.potential));
    }
    std::cout << "wrote held shares and potential (" << r.grid.k << " bins, T=" << r.held.horizon
              << ") to " << dir.string() << "\n";
    return 0;
}

int cmd_forecast(const PipelineOpts& o, const SolverOpts& s) {
    auto r = run_pipeline(o);
    const auto params = make_params(s);
    const auto hamiltonian = qwell::assemble_hamiltonian(r.grid, r.potential, params);
    const auto solution = qwell::solve_eigenpairs(hamiltonian, r.grid, s.states, params);
    const qwell::ForecastMode mode =
        s.forecast == "ground" ? qwell::ForecastMode(qwell::GroundState{})
                               : qwell::ForecastMode(qwell::BoltzmannMixture{s.temperature});
    const auto density = qwell::forecast_density(solution, mode);
    const fs::path dir(o.out_dir);
    if (o.format == "json") {
        write_file(dir / "eigen.json", qwell::to_json(solution).dump(2) + "\n");
        write_file(dir / "density.json", qwell::to_json(density).dump(2) + "\n");
    } else {
        write_file(dir / "eigen.csv", qwell::to_csv(solution));
        write_file(dir / "density.csv", qwell::to_csv(density));
    }
    std::cout << "wrote " << s.states << " states and forecast density to " << dir.string()
              << "\n";
    return 0;
}

struct AnalyzeOpts {
    double min_prominence = 0.25;
    double energy_min = 0.1;
    double energy_max = 2.0;
    int energy_points = 20;
    std::optional<int> region_lo;
    std::optional<int> region_hi;
    int steps = 10;
    double build_rate = 0.2;
    double decay_rate = 0.1;
};

int cmd_analyze_barriers(const PipelineOpts& o, const AnalyzeOpts& a) {
    auto r = run_pipeline(o);
    auto barriers = qwell::detect_barriers(r.potential, a.min_prominence);
    write_file(fs::path(o.out_dir) / "barriers.json", qwell::to_json(barriers).dump(2) + "\n");
    std::cout << "detected " << barriers.levels.size() << " barrier(s)\n";
    return 0;
}

int cmd_analyze_breakout(const PipelineOpts& o, const SolverOpts& s, const AnalyzeOpts& a) {
    auto r = run_pipeline(o);
    const auto params = make_params(s);
    const auto solution = qwell::solve_eigenpairs(
        qwell::assemble_hamiltonian(r.grid, r.potential, params), r.grid, s.states, params);
    const qwell::ForecastMode mode =
        s.forecast == "ground" ? qwell::ForecastMode(qwell::GroundState{})
                               : qwell::ForecastMode(qwell::BoltzmannMixture{s.temperature});
    const auto density = qwell::forecast_density(solution, mode);
    const auto barriers = qwell::detect_barriers(r.potential, a.min_prominence);
    const auto probs = qwell::breakout_direction(density, barriers);
    nlohmann::json out = qwell::to_json(probs);
    out["barriers"] = qwell::to_json(barriers);
    write_file(fs::path(o.out_dir) / "breakout.json", out.dump(2) + "\n");
    std::cout << "p_up=" << qwell::format_double(probs.up)
              << " p_down=" << qwell::format_double(probs.down)
              << " p_inside=" << qwell::format_double(probs.inside) << "\n";
    return 0;
}

int cmd_analyze_tunnel(const PipelineOpts& o, const SolverOpts& s, const AnalyzeOpts& a) {
    auto r = run_pipeline(o);
    if (a.energy_points < 1) qwell::fail("bad_argument", "need at least one energy point");
    if (a.energy_min <= 0 || a.energy_max < a.energy_min) {
        qwell::fail("bad_argument", "bad energy sweep bounds");
    }
    const auto params = make_params(s);
    qwell::BinRange region{a.region_lo.value_or(0), a.region_hi.value_or(r.grid.k - 1)};
    std::vector<qwell::TunnelingResult> sweep;
    for (int i = 0; i < a.energy_points; ++i) {
        const double e = a.energy_points == 1
                             ? a.energy_min
                             : a.energy_min + (a.energy_max - a.energy_min) * i /
                                                  (a.energy_points - 1);
        sweep.push_back(qwell::transmission_reflection(r.potential, params, e, region));
    }
    const fs::path dir(o.out_dir);
    if (o.format == "json") {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& t : sweep) {
            rows.push_back({{"energy", t.energy},
                            {"transmission", t.transmission},
                            {"reflection", t.reflection}});
        }
        write_file(dir / "tunnel.json", rows.dump(2) + "\n");
    } else {
        write_file(dir / "tunnel.csv", qwell::to_csv(sweep));
    }
    std::cout << "wrote " << sweep.size() << " (E, T, R) points to " << dir.string() << "\n";
    return 0;
}

int cmd_analyze_migrate(const PipelineOpts& o, const SolverOpts& s, const AnalyzeOpts& a) {
    auto r = run_pipeline(o);
    const auto trajectory =
        qwell::run_migration(a.steps, r.potential, make_params(s), a.build_rate, a.decay_rate);
    write_file(fs::path(o.out_dir) / "migration.json", qwell::to_json(trajectory).dump(2) + "\n");
    std::cout << "wrote " << trajectory.size() << " trajectory frames\n";
    return 0;
}

struct SynthOpts {
    std::string process = "sideways";
    int days = 60;
    std::uint64_t seed = 1;
    double base_volume = 100000;
    double volume_jitter = 0.2;
    std::int64_t free_float = 10000000;
    double channel_low = 10;
    double channel_high = 12;
    double start = 100;
    double drift = 0;
    double vol = 0.01;
    std::vector<double> peaks = {10, 14};
    std::vector<double> peak_weights;
    double noise = 0.01;
    std::string out_dir = ".";
};

int cmd_synth(const SynthOpts& o) {
    qwell::SyntheticSpec spec;
    spec.days = o.days;
    spec.seed = o.seed;
    spec.base_volume = o.base_volume;
    spec.volume_jitter = o.volume_jitter;
    spec.free_float = o.free_float;
    if (o.process == "sideways") {
        spec.process = qwell::SidewaysChannel{o.channel_low, o.channel_high};
    } else if (o.process == "trend") {
        spec.process = qwell::TrendingWalk{o.start, o.drift, o.vol};
    } else {
        auto weights = o.peak_weights;
        if (weights.empty()) weights.assign(o.peaks.size(), 1.0);
        spec.process = qwell::BimodalAccumulation{o.peaks, weights, o.noise};
    }
    const auto series = qwell::generate_series(spec);
    write_file(fs::path(o.out_dir) / "series.csv", qwell::to_csv(series.bars));
    std::cout << "wrote " << series.bars.size() << " bars (free float " << series.free_float
              << ") to " << o.out_dir << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"market potential estimation and infinite-well price forecasting"};
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key=value config file; command-line flags win");

    PipelineOpts pipeline;
    SolverOpts solver;
    AnalyzeOpts analyze;
    SynthOpts synth;

    auto* ingest = app.add_subcommand("ingest", "parse and validate an EOD CSV file");
    add_pipeline_options(ingest, pipeline);

    auto* potential = app.add_subcommand("potential", "build held-shares and potential profiles");
    add_pipeline_options(potential, pipeline);

    auto* forecast = app.add_subcommand("forecast", "solve eigenstates and forecast density");
    add_pipeline_options(forecast, pipeline);
    add_solver_options(forecast, solver);

    auto* an = app.add_subcommand("analyze", "barrier/breakout/tunnel/migrate analysis");
    an->require_subcommand(1);
    auto* barriers = an->add_subcommand("barriers", "detect potential barriers");
    auto* breakout = an->add_subcommand("breakout", "channel breakout probabilities");
    auto* tunnel = an->add_subcommand("tunnel", "transmission/reflection energy sweep");
    auto* migrate = an->add_subcommand("migrate", "iterated trend migration");
    for (auto* cmd : {barriers, breakout, tunnel, migrate}) {
        add_pipeline_options(cmd, pipeline);
        add_solver_options(cmd, solver);
        cmd->add_option("--min-prominence", analyze.min_prominence, "barrier prominence cutoff");
    }
    tunnel->add_option("--energy-min", analyze.energy_min, "sweep start energy");
    tunnel->add_option("--energy-max", analyze.energy_max, "sweep end energy");
    tunnel->add_option("--energy-points", analyze.energy_points, "sweep point count");
    tunnel->add_option("--region-lo", analyze.region_lo, "first bin of the scattering region");
    tunnel->add_option("--region-hi", analyze.region_hi, "last bin of the scattering region");
    migrate->add_option("--steps", analyze.steps, "migration steps");
    migrate->add_option("--build-rate", analyze.build_rate, "constructor rate in [0,1]");
    migrate->add_option("--decay-rate", analyze.decay_rate, "destructor rate in [0,1]");

    auto* synth_cmd = app.add_subcommand("synth", "generate a deterministic synthetic series");
    synth_cmd->add_option("--process", synth.process, "price process")
        ->check(CLI::IsMember({"sideways", "trend", "bimodal"}));
    synth_cmd->add_option("--days", synth.days, "number of bars");
    synth_cmd->add_option("--seed", synth.seed, "generator seed");
    synth_cmd->add_option("--base-volume", synth.base_volume, "mean daily volume");
    synth_cmd->add_option("--volume-jitter", synth.volume_jitter, "relative volume jitter");
    synth_cmd->add_option("--free-float", synth.free_float, "free float in shares");
    synth_cmd->add_option("--channel-low", synth.channel_low, "sideways channel floor");
    synth_cmd->add_option("--channel-high", synth.channel_high, "sideways channel ceiling");
    synth_cmd->add_option("--start", synth.start, "trending walk start price");
    synth_cmd->add_option("--drift", synth.drift, "trending walk drift per day");
    synth_cmd->add_option("--vol", synth.vol, "trending walk volatility per day");
    synth_cmd->add_option("--peaks", synth.peaks, "bimodal peak prices");
    synth_cmd->add_option("--peak-weights", synth.peak_weights, "bimodal peak weights");
    synth_cmd->add_option("--noise", synth.noise, "bimodal close-price scatter");
    synth_cmd->add_option("--out", synth.out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ingest) return cmd_ingest(pipeline);
        if (*potential) return cmd_potential(pipeline);
        if (*forecast) return cmd_forecast(pipeline, solver);
        if (*barriers) return cmd_analyze_barriers(pipeline, analyze);
        if (*breakout) return cmd_analyze_breakout(pipeline, solver, analyze);
        if (*tunnel) return cmd_analyze_tunnel(pipeline, solver, analyze);
        if (*migrate) return cmd_analyze_migrate(pipeline, solver, analyze);
        if (*synth_cmd) return cmd_synth(synth);
    } catch (const qwell::Error& e) {
        if (pipeline.format == "json") {
            nlohmann::json err = {{"error_code", e.code()}, {"message", e.what()}};
            std::cerr << err.dump() << "\n";
        } else {
            std::cerr << "error (" << e.code() << "): " << e.what() << "\n";
        }
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
