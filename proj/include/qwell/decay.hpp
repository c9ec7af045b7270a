#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "qwell/error.hpp"
#include "qwell/market_data.hpp"

namespace qwell {

// Survival laws for previously traded share blocks.

struct ConstantExponential {
    double lambda = 0; // per day
};

struct VolatilityLinked {
    double a = 0; // per day
    double b = 0; // per day, coefficient of 1/sigma
};

struct GaussianHolding {
    double sigma_hold = 1; // days
};

using DecayLaw = std::variant<ConstantExponential, VolatilityLinked, GaussianHolding>;

/// P = v_m / v_ff: daily probability that a free-float share changes hands.
inline double turnover_probability(double v_m, double v_ff) {
    if (v_ff <= 0) fail("bad_argument", "free float must be positive");
    if (v_m < 0) fail("bad_argument", "mean daily volume must be non-negative");
    const double p = v_m / v_ff;
    if (p >= 1.0) fail("domain_error", "turnover probability must be < 1");
    return p;
}

/// lambda = -ln(1 - P).
inline double decay_constant(double p) {
    if (p < 0 || p >= 1) fail("domain_error", "probability must lie in [0, 1)");
    return -std::log1p(-p);
}

/// lambda_i = a + b / sigma_daily.
inline double volatility_linked_lambda(double sigma_daily, double a, double b) {
    if (sigma_daily <= 0) fail("bad_argument", "daily volatility must be positive");
    const double lambda = a + b / sigma_daily;
    if (lambda < 0) fail("domain_error", "volatility-linked rate is negative");
    return lambda;
}

/// Fraction of a block still held after t trading days. weight(0) = 1 for every law.
inline double survival_weight(const DecayLaw& law, double t,
                              std::optional<double> sigma_daily = std::nullopt) {
    if (t < 0) fail("bad_argument", "elapsed time must be non-negative");
    return std::visit(
        [&](const auto& l) -> double {
            using L = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<L, ConstantExponential>) {
                if (l.lambda < 0) fail("bad_argument", "lambda must be non-negative");
                return std::exp(-l.lambda * t);
            } else if constexpr (std::is_same_v<L, VolatilityLinked>) {
                if (!sigma_daily) {
                    fail("bad_argument", "volatility-linked law requires a daily volatility");
                }
                return std::exp(-volatility_linked_lambda(*sigma_daily, l.a, l.b) * t);
            } else {
                if (l.sigma_hold <= 0) fail("bad_argument", "sigma_hold must be positive");
                const double u = t / (std::sqrt(2.0) * l.sigma_hold);
                return std::exp(-u * u);
            }
        },
        law);
}

/// Rolling sample standard deviation of log close-to-close returns.
/// Entry i covers the `window` returns ending at bar i; NaN where undefined.
inline std::vector<double> rolling_log_volatility(const MarketSeries& series, std::size_t window) {
    if (window < 2) fail("bad_argument", "volatility window must be >= 2");
    const auto& bars = series.bars;
    std::vector<double> sigma(bars.size(), std::numeric_limits<double>::quiet_NaN());
    std::vector<double> rets(bars.size(), 0.0);
    for (std::size_t i = 1; i < bars.size(); ++i) {
        if (bars[i].close <= 0 || bars[i - 1].close <= 0) {
            fail("domain_error", "non-positive close price, cannot take log return");
        }
        rets[i] = std::log(bars[i].close / bars[i - 1].close);
    }
    for (std::size_t i = window; i < bars.size(); ++i) {
        double mean = 0;
        for (std::size_t j = i - window + 1; j <= i; ++j) mean += rets[j];
        mean /= static_cast<double>(window);
        double ss = 0;
        for (std::size_t j = i - window + 1; j <= i; ++j) {
            ss += (rets[j] - mean) * (rets[j] - mean);
        }
        sigma[i] = std::sqrt(ss / static_cast<double>(window - 1));
    }
    return sigma;
}

/// Least-squares fit of lambda_i = -ln(1 - v_i/v_ff) against 1/sigma_i.
/// Returns (a, b) of lambda = a + b/sigma.
inline std::pair<double, double> calibrate_g(const MarketSeries& series,
                                             std::size_t volatility_window) {
    const auto sigma = rolling_log_volatility(series, volatility_window);
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < series.bars.size(); ++i) {
        if (std::isnan(sigma[i]) || sigma[i] <= 0) continue;
        const double p =
            turnover_probability(static_cast<double>(series.bars[i].volume),
                                 static_cast<double>(series.free_float));
        xs.push_back(1.0 / sigma[i]);
        ys.push_back(decay_constant(p));
    }
    if (xs.size() < 2) fail("domain_error", "degenerate regression: fewer than 2 usable days");

    const double n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx <= n * 1e-24 * mx * mx + 1e-300) {
        fail("domain_error", "degenerate regression: 1/sigma values are indistinct");
    }
    const double b = sxy / sxx;
    const double a = my - b * mx;
    return {a, b};
}

/// Smallest trailing window T whose summed volume reaches the free float.
inline int free_float_rotation_period(const MarketSeries& series) {
    std::int64_t cum = 0;
    int t = 0;
    for (auto it = series.bars.rbegin(); it != series.bars.rend(); ++it) {
        cum += it->volume;
        ++t;
        if (cum >= series.free_float) return t;
    }
    fail("domain_error", "series too short for one rotation");
}

} // namespace qwell
