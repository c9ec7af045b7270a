#include <gtest/gtest.h>

#include <cmath>

#include "qwell/decay.hpp"
#include "qwell/synthetic.hpp"

using namespace qwell;

namespace {

TEST(TurnoverProbability, Arithmetic) {
    EXPECT_DOUBLE_EQ(turnover_probability(500000, 10000000), 0.05);
    EXPECT_DOUBLE_EQ(turnover_probability(0, 10000000), 0.0);
}

TEST(TurnoverProbability, SingularAtFullTurnover) {
    EXPECT_THROW(turnover_probability(100, 100), Error);
    EXPECT_THROW(turnover_probability(150, 100), Error);
    EXPECT_THROW(turnover_probability(-1, 100), Error);
    EXPECT_THROW(turnover_probability(1, 0), Error);
}

TEST(DecayConstant, ClosedForms) {
    EXPECT_DOUBLE_EQ(decay_constant(0.0), 0.0);
    EXPECT_NEAR(decay_constant(0.5), std::log(2.0), 1e-15);
    EXPECT_NEAR(decay_constant(1.0 - std::exp(-1.0)), 1.0, 1e-14);
    EXPECT_THROW(decay_constant(1.0), Error);
    EXPECT_THROW(decay_constant(-0.1), Error);
}

TEST(DecayConstant, InvertsTurnoverToMachinePrecision) {
    for (int i = 0; i < 100; ++i) {
        const double p = i / 100.0;
        const double lambda = decay_constant(turnover_probability(p * 1e6, 1e6));
        EXPECT_NEAR(std::exp(-lambda), 1.0 - p, 1e-14);
    }
}

TEST(SurvivalWeight, ConstantExponential) {
    DecayLaw law = ConstantExponential{std::log(2.0)};
    EXPECT_DOUBLE_EQ(survival_weight(law, 0), 1.0);
    EXPECT_NEAR(survival_weight(law, 1), 0.5, 1e-15);
    EXPECT_NEAR(survival_weight(law, 2), 0.25, 1e-15);
    EXPECT_THROW(survival_weight(law, -1), Error);
}

TEST(SurvivalWeight, GaussianHolding) {
    const double s = 3.7;
    DecayLaw law = GaussianHolding{s};
    EXPECT_DOUBLE_EQ(survival_weight(law, 0), 1.0);
    EXPECT_NEAR(survival_weight(law, std::sqrt(2.0) * s), std::exp(-1.0), 1e-14);
}

TEST(SurvivalWeight, VolatilityLinkedNeedsSigma) {
    DecayLaw law = VolatilityLinked{0.0, 0.1};
    EXPECT_THROW(survival_weight(law, 1), Error);
    EXPECT_NEAR(survival_weight(law, 1, 0.02), std::exp(-5.0), 1e-14);
    EXPECT_DOUBLE_EQ(survival_weight(law, 0, 0.02), 1.0);
}

TEST(SurvivalWeight, MonotoneNonIncreasingInTime) {
    Lcg64 rng(5);
    std::vector<DecayLaw> laws = {ConstantExponential{0.3}, VolatilityLinked{0.01, 0.05},
                                  GaussianHolding{4.0}};
    for (const auto& law : laws) {
        double prev = 2.0;
        for (double t = 0; t <= 50; t += 0.5 + rng.next_uniform()) {
            const double w = survival_weight(law, t, 0.02);
            EXPECT_LE(w, prev);
            EXPECT_GE(w, 0.0);
            EXPECT_LE(w, 1.0);
            prev = w;
        }
    }
}

TEST(SurvivalWeight, ExponentialComposition) {
    DecayLaw law = ConstantExponential{0.137};
    Lcg64 rng(9);
    for (int i = 0; i < 50; ++i) {
        const double t1 = 20.0 * rng.next_uniform();
        const double t2 = 20.0 * rng.next_uniform();
        const double whole = survival_weight(law, t1 + t2);
        const double split = survival_weight(law, t1) * survival_weight(law, t2);
        EXPECT_NEAR(whole, split, 1e-12 * std::max(1.0, whole));
    }
}

TEST(VolatilityLinkedLambda, ArithmeticAndGuards) {
    EXPECT_DOUBLE_EQ(volatility_linked_lambda(0.02, 0.0, 0.1), 5.0);
    EXPECT_DOUBLE_EQ(volatility_linked_lambda(0.02, 0.3, 0.0), 0.3);
    EXPECT_THROW(volatility_linked_lambda(0.0, 0.0, 0.1), Error);
    EXPECT_THROW(volatility_linked_lambda(1.0, -1.0, 0.001), Error);
}

MarketSeries series_with_exact_g(double a, double b, std::uint64_t seed, std::size_t window) {
    // Random-walk closes give a varying rolling sigma; volumes are then
    // chosen so that each day's realized lambda is exactly a + b/sigma.
    SyntheticSpec spec;
    spec.days = 120;
    spec.process = TrendingWalk{50.0, 0.0, 0.02};
    spec.seed = seed;
    spec.free_float = 100000000;
    auto series = generate_series(spec);
    const auto sigma = rolling_log_volatility(series, window);
    for (std::size_t i = 0; i < series.bars.size(); ++i) {
        if (std::isnan(sigma[i])) continue;
        const double lambda = a + b / sigma[i];
        const double p = 1.0 - std::exp(-lambda);
        series.bars[i].volume =
            static_cast<std::int64_t>(std::llround(p * static_cast<double>(series.free_float)));
    }
    return series;
}

TEST(CalibrateG, RecoversExactCoefficients) {
    const double a = 0.01, b = 0.05;
    auto series = series_with_exact_g(a, b, 42, 10);
    auto [fit_a, fit_b] = calibrate_g(series, 10);
    // volumes are rounded to integers, so allow a hair beyond 1e-6
    EXPECT_NEAR(fit_a, a, 2e-6);
    EXPECT_NEAR(fit_b, b, 2e-6);
}

TEST(CalibrateG, VolatilityIndependentLambdaGivesZeroSlope) {
    auto series = series_with_exact_g(0.02, 0.0, 7, 10);
    auto [fit_a, fit_b] = calibrate_g(series, 10);
    EXPECT_NEAR(fit_a, 0.02, 1e-5);
    EXPECT_NEAR(fit_b, 0.0, 1e-5);
}

TEST(CalibrateG, ConstantVolatilityIsDegenerate) {
    // Closes follow an exact geometric ramp, so every log return is equal
    // and the rolling sigma vanishes: no usable regression points.
    std::vector<EodBar> bars;
    Date d{2020, 1, 2};
    double close = 100;
    for (int i = 0; i < 60; ++i) {
        EodBar b;
        b.date = d;
        close *= 1.001;
        b.open = b.high = b.low = b.close = close;
        b.volume = 1000;
        bars.push_back(b);
        d = next_calendar_day(d);
    }
    auto series = validate_series(bars, 10000000);
    EXPECT_THROW(calibrate_g(series, 10), Error);
}

TEST(RotationPeriod, TrailingWindow) {
    std::vector<EodBar> bars;
    Date d{2020, 1, 2};
    for (int i = 0; i < 20; ++i) {
        EodBar b;
        b.date = d;
        b.open = b.high = b.low = b.close = 10;
        b.volume = 10;
        bars.push_back(b);
        d = next_calendar_day(d);
    }
    EXPECT_EQ(free_float_rotation_period(validate_series(bars, 100)), 10);
    EXPECT_EQ(free_float_rotation_period(validate_series(bars, 10)), 1);
    EXPECT_THROW(free_float_rotation_period(validate_series(bars, 201)), Error);
}

} // namespace
