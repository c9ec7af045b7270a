#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "qwell/decay.hpp"
#include "qwell/error.hpp"
#include "qwell/grid.hpp"
#include "qwell/market_data.hpp"
#include "qwell/potential.hpp"
#include "qwell/solver.hpp"

namespace qwell {

/// 64-bit LCG (Knuth MMIX constants), fixed here so that seeded series are
/// reproducible bit-for-bit across platforms and language ports.
class Lcg64 {
public:
    explicit Lcg64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ = state_ * 6364136223846793005ULL + 1442695040888963407ULL;
        return state_;
    }

    /// Uniform in [0, 1) from the top 53 bits.
    double next_uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; pairs are consumed deterministically.
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_uniform();
        while (u1 <= 0) u1 = next_uniform();
        const double u2 = next_uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * 3.14159265358979323846 * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    std::uint64_t state_;
    double spare_ = 0;
    bool have_spare_ = false;
};

struct SidewaysChannel {
    double floor = 10;
    double ceiling = 12;
};

struct TrendingWalk {
    double start = 100;
    double drift = 0;  // per day, log scale
    double vol = 0.01; // per day, log scale
};

struct BimodalAccumulation {
    std::vector<double> peaks;   // prices where volume concentrates
    std::vector<double> weights; // relative day frequency per peak
    double noise = 0.01;         // absolute close-price scatter around a peak
};

using PriceProcess = std::variant<SidewaysChannel, TrendingWalk, BimodalAccumulation>;

struct SyntheticSpec {
    int days = 60;
    PriceProcess process;
    double base_volume = 100000;
    double volume_jitter = 0.2; // relative, uniform
    std::int64_t free_float = 10000000;
    std::uint64_t seed = 1;
    Date start_date{2020, 1, 2};
};

namespace detail {

inline void check_spec(const SyntheticSpec& spec) {
    if (spec.days < 1) fail("bad_argument", "days must be >= 1");
    if (spec.base_volume < 1) fail("bad_argument", "base_volume must be >= 1");
    if (spec.volume_jitter < 0 || spec.volume_jitter >= 1) {
        fail("bad_argument", "volume_jitter must lie in [0, 1)");
    }
    if (spec.free_float <= 0) fail("bad_argument", "free_float must be positive");
    std::visit(
        [](const auto& p) {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, SidewaysChannel>) {
                if (!(0 < p.floor && p.floor < p.ceiling)) {
                    fail("bad_argument", "channel requires 0 < floor < ceiling");
                }
            } else if constexpr (std::is_same_v<P, TrendingWalk>) {
                if (p.start <= 0) fail("bad_argument", "start price must be positive");
                if (p.vol < 0) fail("bad_argument", "vol must be non-negative");
            } else {
                if (p.peaks.empty()) fail("bad_argument", "need at least one peak");
                if (p.weights.size() != p.peaks.size()) {
                    fail("bad_argument", "one weight per peak required");
                }
                for (double q : p.peaks) {
                    if (q <= 0) fail("bad_argument", "peak prices must be positive");
                }
                double total = 0;
                for (double w : p.weights) {
                    if (w < 0) fail("bad_argument", "weights must be non-negative");
                    total += w;
                }
                if (total <= 0) fail("bad_argument", "weights must not all be zero");
                if (p.noise < 0) fail("bad_argument", "noise must be non-negative");
            }
        },
        spec.process);
}

} // namespace detail

/// Deterministic synthetic series: identical spec (seed included) gives an
/// identical series on every run and platform.
inline MarketSeries generate_series(const SyntheticSpec& spec) {
    detail::check_spec(spec);
    Lcg64 rng(spec.seed);
    std::vector<EodBar> bars;
    bars.reserve(static_cast<std::size_t>(spec.days));
    Date date = spec.start_date;

    auto round_price = [](double p) { return std::round(p * 1e6) / 1e6; };
    auto make_volume = [&](double u) {
        const double v = spec.base_volume * (1.0 + spec.volume_jitter * (2.0 * u - 1.0));
        return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::llround(v)));
    };

    std::visit(
        [&](const auto& p) {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, SidewaysChannel>) {
                const double width = p.ceiling - p.floor;
                double close = p.floor + 0.5 * width;
                for (int i = 0; i < spec.days; ++i) {
                    const double open = close;
                    close += 0.15 * width * (2.0 * rng.next_uniform() - 1.0);
                    // reflect back inside the channel
                    const double margin = 0.02 * width;
                    if (close > p.ceiling - margin) close = 2.0 * (p.ceiling - margin) - close;
                    if (close < p.floor + margin) close = 2.0 * (p.floor + margin) - close;
                    close = std::clamp(close, p.floor + margin, p.ceiling - margin);
                    const double wick = 0.01 * width * rng.next_uniform();
                    EodBar b;
                    b.date = date;
                    b.open = round_price(open);
                    b.close = round_price(close);
                    b.high = round_price(std::min(p.ceiling, std::max(b.open, b.close) + wick));
                    b.low = round_price(std::max(p.floor, std::min(b.open, b.close) - wick));
                    b.high = std::max({b.high, b.open, b.close});
                    b.low = std::min({b.low, b.open, b.close});
                    b.volume = make_volume(rng.next_uniform());
                    bars.push_back(b);
                    date = next_calendar_day(date);
                }
            } else if constexpr (std::is_same_v<P, TrendingWalk>) {
                double close = p.start;
                for (int i = 0; i < spec.days; ++i) {
                    const double open = close;
                    close *= std::exp(p.drift + p.vol * rng.next_normal());
                    const double wick = 0.002 * close * rng.next_uniform();
                    EodBar b;
                    b.date = date;
                    b.open = round_price(open);
                    b.close = round_price(close);
                    b.high = round_price(std::max(b.open, b.close) + wick);
                    b.low = round_price(std::max(1e-6, std::min(b.open, b.close) - wick));
                    b.high = std::max({b.high, b.open, b.close});
                    b.low = std::min({b.low, b.open, b.close});
                    b.volume = make_volume(rng.next_uniform());
                    bars.push_back(b);
                    date = next_calendar_day(date);
                }
            } else {
                double weight_total = 0;
                for (double w : p.weights) weight_total += w;
                for (int i = 0; i < spec.days; ++i) {
                    const double pick = rng.next_uniform() * weight_total;
                    std::size_t idx = 0;
                    double acc = 0;
                    for (std::size_t q = 0; q < p.weights.size(); ++q) {
                        acc += p.weights[q];
                        if (pick < acc) {
                            idx = q;
                            break;
                        }
                        idx = q;
                    }
                    const double anchor = p.peaks[idx];
                    const double close = std::max(1e-6, anchor + p.noise * rng.next_normal());
                    const double open = std::max(1e-6, close + 0.25 * p.noise * rng.next_normal());
                    const double wick = 0.25 * p.noise * rng.next_uniform();
                    EodBar b;
                    b.date = date;
                    b.open = round_price(open);
                    b.close = round_price(close);
                    b.high = round_price(std::max(b.open, b.close) + wick);
                    b.low = round_price(std::max(1e-6, std::min(b.open, b.close) - wick));
                    b.high = std::max({b.high, b.open, b.close});
                    b.low = std::min({b.low, b.open, b.close});
                    b.volume = make_volume(rng.next_uniform());
                    bars.push_back(b);
                    date = next_calendar_day(date);
                }
            }
        },
        spec.process);

    return validate_series(std::move(bars), spec.free_float);
}

// ---------------------------------------------------------------------------
// Independent oracles. These reimplement the contracts they check from
// scratch and must not call into potential.hpp's accumulation path.
// ---------------------------------------------------------------------------

namespace oracle {

inline double normal_cdf(double x, double mean, double sd) {
    return 0.5 * std::erfc((mean - x) / (sd * std::sqrt(2.0)));
}

/// Fraction of day `bar`'s volume landing in [lo, hi) under `mode`,
/// written as direct interval arithmetic.
inline double day_volume_in_interval(const EodBar& bar, double lo, double hi, bool closed_hi,
                                     IntradayMode mode) {
    const bool point = bar.high == bar.low || mode == IntradayMode::ClosePoint;
    if (point) {
        const bool in = closed_hi ? (bar.close >= lo && bar.close <= hi)
                                  : (bar.close >= lo && bar.close < hi);
        return in ? static_cast<double>(bar.volume) : 0.0;
    }
    const double a = std::max(lo, bar.low);
    const double b = std::min(hi, bar.high);
    if (b <= a) return 0.0;
    if (mode == IntradayMode::Uniform) {
        return static_cast<double>(bar.volume) * (b - a) / (bar.high - bar.low);
    }
    const double sd = (bar.high - bar.low) / 4.0;
    const double norm = normal_cdf(bar.high, bar.close, sd) - normal_cdf(bar.low, bar.close, sd);
    return static_cast<double>(bar.volume) *
           (normal_cdf(b, bar.close, sd) - normal_cdf(a, bar.close, sd)) / norm;
}

/// Direct day-by-bin double loop over survival-weighted volume.
inline HeldSharesProfile brute_force_held_shares(const MarketSeries& series, const PriceGrid& grid,
                                                 const DecayLaw& law, IntradayMode mode,
                                                 std::optional<int> horizon = std::nullopt,
                                                 std::size_t volatility_window = 20) {
    if (series.bars.empty()) fail("bad_argument", "series is empty");

    int t_horizon;
    if (horizon) {
        t_horizon = *horizon;
    } else {
        // trailing rotation period, recomputed here
        std::int64_t cum = 0;
        int t = 0;
        bool found = false;
        for (auto it = series.bars.rbegin(); it != series.bars.rend(); ++it) {
            cum += it->volume;
            ++t;
            if (cum >= series.free_float) {
                found = true;
                break;
            }
        }
        if (!found) fail("domain_error", "series too short for one rotation");
        t_horizon = t;
    }

    const std::size_t n_bars = series.bars.size();
    const std::size_t days_used =
        std::min<std::size_t>(static_cast<std::size_t>(t_horizon) + 1, n_bars);
    const std::size_t first = n_bars - days_used;

    // own rolling volatility, sample stdev of log close-to-close returns
    std::vector<double> sigma(n_bars, std::numeric_limits<double>::quiet_NaN());
    if (std::holds_alternative<VolatilityLinked>(law)) {
        for (std::size_t i = volatility_window; i < n_bars; ++i) {
            std::vector<double> rets;
            for (std::size_t j = i - volatility_window + 1; j <= i; ++j) {
                rets.push_back(std::log(series.bars[j].close / series.bars[j - 1].close));
            }
            double mean = 0;
            for (double r : rets) mean += r;
            mean /= static_cast<double>(rets.size());
            double ss = 0;
            for (double r : rets) ss += (r - mean) * (r - mean);
            sigma[i] = std::sqrt(ss / static_cast<double>(rets.size() - 1));
        }
    }

    HeldSharesProfile profile;
    profile.grid = grid;
    profile.horizon = t_horizon;
    profile.n.assign(static_cast<std::size_t>(grid.k), 0.0);

    bool any_overlap = false;
    for (std::size_t i = first; i < n_bars; ++i) {
        if (series.bars[i].high >= grid.p_min && series.bars[i].low <= grid.p_max) {
            any_overlap = true;
        }
    }
    if (!any_overlap) fail("domain_error", "grid disjoint from data");

    double weighted_total = 0, weighted_placed = 0;
    for (std::size_t i = first; i < n_bars; ++i) {
        const double t = static_cast<double>(n_bars - 1 - i);
        double w;
        if (const auto* ce = std::get_if<ConstantExponential>(&law)) {
            w = std::exp(-ce->lambda * t);
        } else if (const auto* vl = std::get_if<VolatilityLinked>(&law)) {
            if (std::isnan(sigma[i])) {
                fail("domain_error", "insufficient history for rolling volatility at " +
                                         to_string(series.bars[i].date));
            }
            w = std::exp(-(vl->a + vl->b / sigma[i]) * t);
        } else {
            const auto& gh = std::get<GaussianHolding>(law);
            const double u = t / (std::sqrt(2.0) * gh.sigma_hold);
            w = std::exp(-u * u);
        }
        double placed = 0;
        for (int j = 0; j < grid.k; ++j) {
            const double lo = grid.p_min + grid.bin_width() * j;
            const double hi = grid.p_min + grid.bin_width() * (j + 1);
            const double share =
                day_volume_in_interval(series.bars[i], lo, hi, j == grid.k - 1, mode);
            profile.n[static_cast<std::size_t>(j)] += w * share;
            placed += share;
        }
        weighted_total += w * static_cast<double>(series.bars[i].volume);
        weighted_placed += w * placed;
    }
    profile.dropped_fraction =
        weighted_total > 0 ? (weighted_total - weighted_placed) / weighted_total : 0.0;
    if (profile.dropped_fraction < 0) profile.dropped_fraction = 0;
    return profile;
}

/// E_n = n^2 pi^2 hbar^2 / (2 m L^2) for the flat infinite well.
inline double analytic_flat_well_energy(int n, double well_width, const ModelParams& params) {
    params.check();
    if (n < 1) fail("bad_argument", "quantum number must be >= 1");
    if (well_width <= 0) fail("bad_argument", "well width must be positive");
    const double pi = 3.14159265358979323846;
    return static_cast<double>(n) * n * pi * pi * params.hbar_eff * params.hbar_eff /
           (2.0 * params.mass * well_width * well_width);
}

/// Closed-form rectangular-barrier transmission. E < V0 uses sinh, E > V0 sin.
inline double analytic_rectangular_barrier_transmission(double energy, double v0, double width,
                                                        const ModelParams& params) {
    params.check();
    if (energy <= 0 || v0 <= 0) fail("bad_argument", "energy and barrier height must be positive");
    if (width < 0) fail("bad_argument", "width must be non-negative");
    if (energy == v0) fail("bad_argument", "E = V0 limiting case not supported");
    if (energy < v0) {
        const double kappa = std::sqrt(2.0 * params.mass * (v0 - energy)) / params.hbar_eff;
        const double s = std::sinh(kappa * width);
        return 1.0 / (1.0 + v0 * v0 * s * s / (4.0 * energy * (v0 - energy)));
    }
    const double kp = std::sqrt(2.0 * params.mass * (energy - v0)) / params.hbar_eff;
    const double s = std::sin(kp * width);
    return 1.0 / (1.0 + v0 * v0 * s * s / (4.0 * energy * (energy - v0)));
}

} // namespace oracle

} // namespace qwell
