#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "qwell/decay.hpp"
#include "qwell/grid.hpp"
#include "qwell/market_data.hpp"

namespace qwell {

enum class IntradayMode { ClosePoint, Uniform, TruncatedGaussian };

struct DistributedVolume {
    std::vector<double> bin_volume;
    double placed = 0;  // total mass that landed on the grid
    double dropped = 0; // mass outside [p_min, p_max]
};

namespace detail {

inline double gaussian_cdf(double x, double mean, double sd) {
    return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
}

inline DistributedVolume point_mass(const PriceGrid& grid, double price, double volume) {
    DistributedVolume out;
    out.bin_volume.assign(static_cast<std::size_t>(grid.k), 0.0);
    if (auto j = grid.bin_of(price)) {
        out.bin_volume[static_cast<std::size_t>(*j)] = volume;
        out.placed = volume;
    } else {
        out.dropped = volume;
    }
    return out;
}

} // namespace detail

/// Spreads one day's volume across grid bins. Volume at prices outside the
/// grid is dropped and reported, never clamped to the edge bins.
inline DistributedVolume distribute_intraday_volume(const EodBar& bar, const PriceGrid& grid,
                                                    IntradayMode mode) {
    check_bar_invariants(bar, "");
    const double volume = static_cast<double>(bar.volume);

    if (mode == IntradayMode::ClosePoint || bar.high == bar.low) {
        return detail::point_mass(grid, bar.close, volume);
    }

    DistributedVolume out;
    out.bin_volume.assign(static_cast<std::size_t>(grid.k), 0.0);
    const double range = bar.high - bar.low;

    if (mode == IntradayMode::Uniform) {
        for (int j = 0; j < grid.k; ++j) {
            const double lo = std::max(grid.lower_edge(j), bar.low);
            const double hi = std::min(grid.upper_edge(j), bar.high);
            if (hi > lo) {
                out.bin_volume[static_cast<std::size_t>(j)] = volume * (hi - lo) / range;
            }
        }
    } else { // TruncatedGaussian: mean = close, sd = range/4, truncated to [low, high]
        const double sd = range / 4.0;
        const double norm = detail::gaussian_cdf(bar.high, bar.close, sd) -
                            detail::gaussian_cdf(bar.low, bar.close, sd);
        for (int j = 0; j < grid.k; ++j) {
            const double lo = std::max(grid.lower_edge(j), bar.low);
            const double hi = std::min(grid.upper_edge(j), bar.high);
            if (hi > lo) {
                const double mass = detail::gaussian_cdf(hi, bar.close, sd) -
                                    detail::gaussian_cdf(lo, bar.close, sd);
                out.bin_volume[static_cast<std::size_t>(j)] = volume * mass / norm;
            }
        }
    }

    for (double v : out.bin_volume) out.placed += v;
    out.dropped = std::max(0.0, volume - out.placed);
    return out;
}

/// Decay-weighted held shares N(p_j) over the accumulation horizon.
struct HeldSharesProfile {
    PriceGrid grid;
    std::vector<double> n;
    int horizon = 0;          // T: most recent bar has elapsed time 0
    double dropped_fraction = 0; // weighted mass that fell outside the grid
};

/// N(p_j) = sum over the last T+1 bars of that day's distributed volume
/// times survival_weight(law, elapsed days). Horizon defaults to the
/// free-float rotation period. VolatilityLinked weights each day by its own
/// rolling volatility.
inline HeldSharesProfile accumulate_held_shares(const MarketSeries& series, const PriceGrid& grid,
                                                const DecayLaw& law, IntradayMode mode,
                                                std::optional<int> horizon = std::nullopt,
                                                std::size_t volatility_window = 20) {
    if (series.bars.empty()) fail("bad_argument", "series is empty");
    const int t_horizon = horizon ? *horizon : free_float_rotation_period(series);
    if (t_horizon < 0) fail("bad_argument", "horizon must be non-negative");

    const std::size_t n_bars = series.bars.size();
    const std::size_t days_used = std::min<std::size_t>(static_cast<std::size_t>(t_horizon) + 1, n_bars);
    const std::size_t first = n_bars - days_used;

    double data_low = series.bars[first].low, data_high = series.bars[first].high;
    for (std::size_t i = first; i < n_bars; ++i) {
        data_low = std::min(data_low, series.bars[i].low);
        data_high = std::max(data_high, series.bars[i].high);
    }
    if (data_high < grid.p_min || data_low > grid.p_max) {
        fail("domain_error", "grid disjoint from data");
    }

    std::vector<double> sigma;
    if (std::holds_alternative<VolatilityLinked>(law)) {
        sigma = rolling_log_volatility(series, volatility_window);
    }

    HeldSharesProfile profile;
    profile.grid = grid;
    profile.horizon = t_horizon;
    profile.n.assign(static_cast<std::size_t>(grid.k), 0.0);

    double weighted_total = 0, weighted_dropped = 0;
    for (std::size_t i = first; i < n_bars; ++i) {
        const double elapsed = static_cast<double>(n_bars - 1 - i);
        std::optional<double> day_sigma;
        if (!sigma.empty()) {
            if (std::isnan(sigma[i])) {
                fail("domain_error", "insufficient history for rolling volatility at " +
                                         to_string(series.bars[i].date));
            }
            day_sigma = sigma[i];
        }
        const double w = survival_weight(law, elapsed, day_sigma);
        const auto dist = distribute_intraday_volume(series.bars[i], grid, mode);
        for (int j = 0; j < grid.k; ++j) {
            profile.n[static_cast<std::size_t>(j)] += w * dist.bin_volume[static_cast<std::size_t>(j)];
        }
        weighted_total += w * (dist.placed + dist.dropped);
        weighted_dropped += w * dist.dropped;
    }
    profile.dropped_fraction = weighted_total > 0 ? weighted_dropped / weighted_total : 0.0;
    return profile;
}

enum class PotentialSmoothing { AsWritten, PureCount };

/// Potential V(p_j), max-normalized to 1 (all-zero input stays zero).
struct PotentialProfile {
    PriceGrid grid;
    std::vector<double> v;
    double normalization = 0; // max-abs factor divided out; 0 for an all-zero profile
};

/// AsWritten keeps the price-weighted sum (center * N) over the window;
/// PureCount uses N directly. window_radius extends the window by that many
/// neighbor bins on each side (0 = the bin itself).
inline PotentialProfile potential_from_held_shares(const HeldSharesProfile& profile,
                                                   PotentialSmoothing smoothing,
                                                   int window_radius = 0) {
    if (window_radius < 0) fail("bad_argument", "window radius must be non-negative");
    const int k = profile.grid.k;
    PotentialProfile pot;
    pot.grid = profile.grid;
    pot.v.assign(static_cast<std::size_t>(k), 0.0);

    for (int j = 0; j < k; ++j) {
        double acc = 0;
        for (int i = std::max(0, j - window_radius); i <= std::min(k - 1, j + window_radius); ++i) {
            const double n = profile.n[static_cast<std::size_t>(i)];
            acc += smoothing == PotentialSmoothing::AsWritten ? profile.grid.center(i) * n : n;
        }
        pot.v[static_cast<std::size_t>(j)] = acc;
    }

    const double vmax = *std::max_element(pot.v.begin(), pot.v.end());
    pot.normalization = vmax;
    if (vmax > 0) {
        for (double& v : pot.v) v /= vmax;
    }
    return pot;
}

} // namespace qwell
