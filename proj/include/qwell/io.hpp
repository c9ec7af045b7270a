#pragma once

#include <charconv>
#include <string>
#include <vector>

#include <json.hpp>

#include "qwell/analysis.hpp"
#include "qwell/error.hpp"
#include "qwell/grid.hpp"
#include "qwell/market_data.hpp"
#include "qwell/potential.hpp"
#include "qwell/solver.hpp"

namespace qwell {

/// Shortest round-trip decimal representation (std::to_chars).
inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) fail("numeric_error", "cannot format value");
    return std::string(buf, ptr);
}

inline std::string to_csv(const std::vector<EodBar>& bars) {
    std::string out(kEodCsvHeader);
    out += '\n';
    for (const auto& b : bars) {
        out += to_string(b.date);
        out += ',';
        out += format_double(b.open);
        out += ',';
        out += format_double(b.high);
        out += ',';
        out += format_double(b.low);
        out += ',';
        out += format_double(b.close);
        out += ',';
        out += std::to_string(b.volume);
        out += '\n';
    }
    return out;
}

namespace detail {

inline std::string price_value_csv(const PriceGrid& grid, const std::vector<double>& values) {
    std::string out = "price,value\n";
    for (int j = 0; j < grid.k; ++j) {
        out += format_double(grid.center(j));
        out += ',';
        out += format_double(values[static_cast<std::size_t>(j)]);
        out += '\n';
    }
    return out;
}

inline nlohmann::json grid_json(const PriceGrid& grid) {
    return {{"p_min", grid.p_min}, {"p_max", grid.p_max}, {"k", grid.k}, {"eps", grid.eps}};
}

} // namespace detail

inline std::string to_csv(const HeldSharesProfile& p) {
    return detail::price_value_csv(p.grid, p.n);
}

inline nlohmann::json to_json(const HeldSharesProfile& p) {
    return {{"grid", detail::grid_json(p.grid)},
            {"held_shares", p.n},
            {"horizon", p.horizon},
            {"dropped_fraction", p.dropped_fraction}};
}

inline std::string to_csv(const PotentialProfile& p) {
    return detail::price_value_csv(p.grid, p.v);
}

inline nlohmann::json to_json(const PotentialProfile& p) {
    return {{"grid", detail::grid_json(p.grid)},
            {"potential", p.v},
            {"normalization", p.normalization}};
}

inline std::string to_csv(const EigenSolution& s) {
    std::string out = "price";
    for (std::size_t n = 0; n < s.states.size(); ++n) {
        out += ",state_" + std::to_string(n + 1);
    }
    out += '\n';
    for (int j = 0; j < s.grid.k; ++j) {
        out += format_double(s.grid.center(j));
        for (const auto& state : s.states) {
            out += ',';
            out += format_double(state[static_cast<std::size_t>(j)]);
        }
        out += '\n';
    }
    return out;
}

inline nlohmann::json to_json(const EigenSolution& s) {
    return {{"grid", detail::grid_json(s.grid)},
            {"energies", s.energies},
            {"states", s.states},
            {"params",
             {{"hbar_eff", s.params.hbar_eff},
              {"mass", s.params.mass},
              {"potential_scale", s.params.potential_scale}}}};
}

inline std::string to_csv(const ForecastDensity& d) {
    return detail::price_value_csv(d.grid, d.mass);
}

inline nlohmann::json to_json(const ForecastDensity& d) {
    nlohmann::json mode;
    if (std::holds_alternative<GroundState>(d.mode)) {
        mode = {{"kind", "ground"}};
    } else {
        mode = {{"kind", "boltzmann"},
                {"temperature", std::get<BoltzmannMixture>(d.mode).temperature}};
    }
    return {{"grid", detail::grid_json(d.grid)}, {"mass", d.mass}, {"mode", mode}};
}

inline nlohmann::json to_json(const BarrierSet& b) {
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& lvl : b.levels) {
        levels.push_back({{"price", lvl.price}, {"prominence", lvl.prominence}, {"bin", lvl.bin}});
    }
    return {{"min_prominence", b.min_prominence}, {"levels", levels}};
}

inline nlohmann::json to_json(const BreakoutProbabilities& p) {
    return {{"p_up", p.up}, {"p_down", p.down}, {"p_inside", p.inside}};
}

inline std::string to_csv(const std::vector<TunnelingResult>& sweep) {
    std::string out = "energy,transmission,reflection\n";
    for (const auto& r : sweep) {
        out += format_double(r.energy);
        out += ',';
        out += format_double(r.transmission);
        out += ',';
        out += format_double(r.reflection);
        out += '\n';
    }
    return out;
}

inline nlohmann::json to_json(const std::vector<PotentialProfile>& trajectory) {
    if (trajectory.empty()) return nlohmann::json::array();
    nlohmann::json frames = nlohmann::json::array();
    for (const auto& p : trajectory) frames.push_back(p.v);
    return {{"grid", detail::grid_json(trajectory.front().grid)}, {"frames", frames}};
}

} // namespace qwell
