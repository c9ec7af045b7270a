#include <gtest/gtest.h>

#include <cmath>

#include "qwell/analysis.hpp"
#include "qwell/synthetic.hpp"

using namespace qwell;

namespace {

PotentialProfile profile_from(const PriceGrid& g, std::vector<double> raw) {
    const double vmax = *std::max_element(raw.begin(), raw.end());
    PotentialProfile p;
    p.grid = g;
    p.normalization = vmax;
    if (vmax > 0) {
        for (double& x : raw) x /= vmax;
    }
    p.v = std::move(raw);
    return p;
}

double center_of_mass(const PriceGrid& g, const std::vector<double>& values) {
    double num = 0, den = 0;
    for (int j = 0; j < g.k; ++j) {
        num += g.center(j) * values[static_cast<std::size_t>(j)];
        den += values[static_cast<std::size_t>(j)];
    }
    return num / den;
}

TEST(DetectBarriers, FlatPotentialHasNoPeaks) {
    auto g = build_price_grid(0, 10, 50);
    auto flat = profile_from(g, std::vector<double>(50, 1.0));
    EXPECT_TRUE(detect_barriers(flat, 0.5).levels.empty());
}

TEST(DetectBarriers, TwoInjectedPeaks) {
    auto g = build_price_grid(0, 100, 100);
    std::vector<double> v(100, 0.05);
    v[20] = 1.0;
    v[80] = 0.95;
    auto barriers = detect_barriers(profile_from(g, v), 0.5);
    ASSERT_EQ(barriers.levels.size(), 2u);
    EXPECT_EQ(barriers.levels[0].bin, 20);
    EXPECT_EQ(barriers.levels[1].bin, 80);
    EXPECT_LT(barriers.levels[0].price, barriers.levels[1].price);
}

TEST(DetectBarriers, GlobalMaxHasFullProminence) {
    auto g = build_price_grid(0, 10, 50);
    std::vector<double> v(50, 0.3);
    v[25] = 1.0;
    auto barriers = detect_barriers(profile_from(g, v), 1.0);
    ASSERT_EQ(barriers.levels.size(), 1u);
    EXPECT_EQ(barriers.levels[0].bin, 25);
    EXPECT_DOUBLE_EQ(barriers.levels[0].prominence, 1.0);
}

TEST(DetectBarriers, ProminenceFiltersShoulderPeaks) {
    auto g = build_price_grid(0, 10, 9);
    // secondary peak separated from the main one by a high saddle
    std::vector<double> v = {0.0, 1.0, 0.85, 0.9, 0.1, 0.2, 0.1, 0.05, 0.0};
    auto strict = detect_barriers(profile_from(g, v), 0.5);
    ASSERT_EQ(strict.levels.size(), 1u);
    EXPECT_EQ(strict.levels[0].bin, 1);
    auto loose = detect_barriers(profile_from(g, v), 0.04);
    ASSERT_EQ(loose.levels.size(), 3u); // bins 1, 3, 5
    EXPECT_NEAR(loose.levels[1].prominence, 0.05, 1e-12);
}

TEST(DetectBarriers, PlateauPeakReportsCenterBin) {
    auto g = build_price_grid(0, 10, 9);
    std::vector<double> v = {0.0, 0.2, 1.0, 1.0, 1.0, 0.2, 0.0, 0.0, 0.0};
    auto barriers = detect_barriers(profile_from(g, v), 0.5);
    ASSERT_EQ(barriers.levels.size(), 1u);
    EXPECT_EQ(barriers.levels[0].bin, 3);
}

TEST(DetectBarriers, InvariantUnderPositiveRescalingBeforeNormalization) {
    auto g = build_price_grid(0, 100, 100);
    Lcg64 rng(17);
    std::vector<double> raw(100);
    for (double& x : raw) x = rng.next_uniform();
    raw[30] += 3;
    raw[60] += 2.5;
    auto b1 = detect_barriers(profile_from(g, raw), 0.3);
    for (double& x : raw) x *= 123.456;
    auto b2 = detect_barriers(profile_from(g, raw), 0.3);
    ASSERT_EQ(b1.levels.size(), b2.levels.size());
    for (std::size_t i = 0; i < b1.levels.size(); ++i) {
        EXPECT_EQ(b1.levels[i].bin, b2.levels[i].bin);
        EXPECT_NEAR(b1.levels[i].prominence, b2.levels[i].prominence, 1e-12);
    }
}

TEST(BreakoutDirection, SymmetricDensityBalances) {
    const int k = 101;
    auto g = build_price_grid(0, 1, k);
    ForecastDensity density;
    density.grid = g;
    density.mode = GroundState{};
    density.mass.assign(static_cast<std::size_t>(k), 0.0);
    double total = 0;
    for (int j = 0; j < k; ++j) {
        const double x = (j - (k - 1) / 2.0) / 20.0;
        density.mass[static_cast<std::size_t>(j)] = std::exp(-x * x);
        total += density.mass[static_cast<std::size_t>(j)];
    }
    for (double& m : density.mass) m /= total;

    BarrierSet barriers;
    barriers.levels.push_back({g.center(30), 1.0, 30});
    barriers.levels.push_back({g.center(70), 1.0, 70});
    auto p = breakout_direction(density, barriers);
    EXPECT_NEAR(p.up, p.down, 1e-10);
    EXPECT_NEAR(p.up + p.down + p.inside, 1.0, 1e-10);
}

TEST(BreakoutDirection, AllMassInsideChannel) {
    const int k = 50;
    auto g = build_price_grid(0, 1, k);
    ForecastDensity density;
    density.grid = g;
    density.mode = GroundState{};
    density.mass.assign(static_cast<std::size_t>(k), 0.0);
    density.mass[25] = 1.0;
    BarrierSet barriers;
    barriers.levels.push_back({g.center(10), 1.0, 10});
    barriers.levels.push_back({g.center(40), 1.0, 40});
    auto p = breakout_direction(density, barriers);
    EXPECT_DOUBLE_EQ(p.up, 0.0);
    EXPECT_DOUBLE_EQ(p.down, 0.0);
    EXPECT_DOUBLE_EQ(p.inside, 1.0);
}

TEST(BreakoutDirection, NeedsAChannel) {
    const int k = 50;
    auto g = build_price_grid(0, 1, k);
    ForecastDensity density;
    density.grid = g;
    density.mode = GroundState{};
    density.mass.assign(static_cast<std::size_t>(k), 1.0 / k);
    BarrierSet one;
    one.levels.push_back({g.center(10), 1.0, 10});
    EXPECT_THROW(breakout_direction(density, one), Error);
}

TEST(BreakoutDirection, FlatWellTailsMatchQuadrature) {
    const int k = 2000;
    const double h = 1.0 / (k + 1);
    auto g = build_price_grid(0, k * h, k);
    ModelParams params;
    PotentialProfile flat;
    flat.grid = g;
    flat.v.assign(static_cast<std::size_t>(k), 0.0);
    auto sol = solve_eigenpairs(assemble_hamiltonian(g, flat, params), g, 1, params);
    auto density = forecast_density(sol, GroundState{});

    const int lower = k / 4, upper = 3 * k / 4;
    BarrierSet barriers;
    barriers.levels.push_back({g.center(lower), 1.0, lower});
    barriers.levels.push_back({g.center(upper), 1.0, upper});
    auto p = breakout_direction(density, barriers);

    // analytic integral of 2 sin^2(pi x) over the tails of the unit well
    auto cdf = [](double x) { return x - std::sin(2.0 * 3.14159265358979323846 * x) /
                                             (2.0 * 3.14159265358979323846); };
    const double x_lo = (lower + 0.5) * h; // wall at -h/2 in bin coordinates
    const double x_hi = (upper + 1.5) * h;
    EXPECT_NEAR(p.down, cdf(x_lo), 1e-6);
    EXPECT_NEAR(p.up, 1.0 - cdf(x_hi), 1e-6);
}

TEST(TransmissionReflection, FreePropagation) {
    auto g = build_price_grid(0, 1, 100);
    auto flat = profile_from(g, std::vector<double>(100, 0.0));
    flat.normalization = 0;
    auto r = transmission_reflection(flat, ModelParams{}, 5.0, {0, 99});
    EXPECT_NEAR(r.transmission, 1.0, 1e-12);
    EXPECT_NEAR(r.reflection, 0.0, 1e-12);
}

TEST(TransmissionReflection, RectangularBarrierMatchesClosedForm) {
    const int k = 100;
    const int barrier_lo = 30, barrier_hi = 69; // 40 bins wide
    auto g = build_price_grid(0, 10, k);
    std::vector<double> v(k, 0.0);
    for (int j = barrier_lo; j <= barrier_hi; ++j) v[static_cast<std::size_t>(j)] = 1.0;
    auto pot = profile_from(g, v);
    const double width = (barrier_hi - barrier_lo + 1) * g.bin_width();

    ModelParams params;
    params.potential_scale = 4.0; // barrier height
    for (double ratio : {0.2, 0.4, 0.6, 0.8, 0.95, 1.3, 2.0}) {
        const double e = ratio * params.potential_scale;
        auto r = transmission_reflection(pot, params, e, {0, k - 1});
        const double expected =
            oracle::analytic_rectangular_barrier_transmission(e, params.potential_scale, width,
                                                              params);
        EXPECT_NEAR(r.transmission / expected, 1.0, 0.01) << "E/V0 = " << ratio;
        EXPECT_NEAR(r.transmission + r.reflection, 1.0, 1e-8);
        EXPECT_GE(r.transmission, 0.0);
        EXPECT_LE(r.transmission, 1.0);
    }
}

TEST(TransmissionReflection, HighEnergyLimit) {
    const int k = 80;
    auto g = build_price_grid(0, 4, k);
    std::vector<double> v(k, 0.0);
    for (int j = 30; j < 50; ++j) v[static_cast<std::size_t>(j)] = 1.0;
    auto pot = profile_from(g, v);
    ModelParams params;
    params.potential_scale = 2.0;
    const double t1 = transmission_reflection(pot, params, 20.0, {0, k - 1}).transmission;
    const double t2 = transmission_reflection(pot, params, 200.0, {0, k - 1}).transmission;
    EXPECT_GT(t2, t1);
    EXPECT_NEAR(t2, 1.0, 1e-3);
}

TEST(TransmissionReflection, ClosedChannelFails) {
    const int k = 50;
    auto g = build_price_grid(0, 1, k);
    auto pot = profile_from(g, std::vector<double>(50, 1.0));
    ModelParams params;
    params.potential_scale = 10.0;
    EXPECT_THROW(transmission_reflection(pot, params, 5.0, {0, k - 1}), Error);
    EXPECT_THROW(transmission_reflection(pot, params, 10.0, {0, k - 1}), Error);
}

TEST(TrendMigrationStep, IdentityAtZeroRates) {
    auto g = build_price_grid(0, 10, 40);
    std::vector<double> v(40, 0.1);
    v[20] = 1.0;
    auto pot = profile_from(g, v);
    ForecastDensity density;
    density.grid = g;
    density.mode = GroundState{};
    density.mass.assign(40, 1.0 / 40);
    auto next = trend_migration_step(pot, density, 0.0, 0.0);
    EXPECT_EQ(next.v, pot.v);
}

TEST(TrendMigrationStep, FixedPointWhenDensityMatchesPotential) {
    auto g = build_price_grid(0, 10, 40);
    std::vector<double> v(40);
    for (int j = 0; j < 40; ++j) v[static_cast<std::size_t>(j)] = std::exp(-std::pow(j - 20.0, 2) / 30.0);
    auto pot = profile_from(g, v);
    ForecastDensity density;
    density.grid = g;
    density.mode = GroundState{};
    density.mass = pot.v; // proportional to V
    double total = 0;
    for (double m : density.mass) total += m;
    for (double& m : density.mass) m /= total;
    auto next = trend_migration_step(pot, density, 0.3, 0.3);
    for (int j = 0; j < 40; ++j) {
        const auto uj = static_cast<std::size_t>(j);
        EXPECT_NEAR(next.v[uj], pot.v[uj], 1e-12);
    }
}

TEST(TrendMigrationStep, ShiftedDensityPullsCenterOfMass) {
    auto g = build_price_grid(0, 10, 41);
    std::vector<double> v(41);
    for (int j = 0; j < 41; ++j) v[static_cast<std::size_t>(j)] = std::exp(-std::pow(j - 20.0, 2) / 12.0);
    auto pot = profile_from(g, v);
    ForecastDensity density;
    density.grid = g;
    density.mode = GroundState{};
    density.mass.assign(41, 0.0);
    for (int j = 0; j < 41; ++j) {
        density.mass[static_cast<std::size_t>(j)] = std::exp(-std::pow(j - 21.0, 2) / 12.0);
    }
    double total = 0;
    for (double m : density.mass) total += m;
    for (double& m : density.mass) m /= total;
    auto next = trend_migration_step(pot, density, 0.4, 0.2);
    EXPECT_GT(center_of_mass(g, next.v), center_of_mass(g, pot.v));
    const double vmax = *std::max_element(next.v.begin(), next.v.end());
    EXPECT_DOUBLE_EQ(vmax, 1.0);
    for (double x : next.v) EXPECT_GE(x, 0.0);
}

TEST(TrendMigrationStep, RejectsBadRates) {
    auto g = build_price_grid(0, 10, 10);
    auto pot = profile_from(g, std::vector<double>(10, 1.0));
    ForecastDensity density;
    density.grid = g;
    density.mode = GroundState{};
    density.mass.assign(10, 0.1);
    EXPECT_THROW(trend_migration_step(pot, density, -0.1, 0.0), Error);
    EXPECT_THROW(trend_migration_step(pot, density, 0.0, 1.5), Error);
}

TEST(RunMigration, ZeroRatesGiveConstantTrajectory) {
    auto g = build_price_grid(0, 1, 60);
    std::vector<double> v(60);
    for (int j = 0; j < 60; ++j) v[static_cast<std::size_t>(j)] = std::exp(-std::pow(j - 30.0, 2) / 40.0);
    auto pot = profile_from(g, v);
    auto trajectory = run_migration(5, pot, ModelParams{}, 0.0, 0.0);
    ASSERT_EQ(trajectory.size(), 6u);
    EXPECT_EQ(trajectory.front().v, trajectory.back().v);
}

TEST(RunMigration, SymmetricSetupKeepsPeakCentered) {
    const int k = 61;
    const double h = 1.0 / (k + 1);
    auto g = build_price_grid(0, k * h, k);
    std::vector<double> v(k);
    for (int j = 0; j < k; ++j) v[static_cast<std::size_t>(j)] = std::exp(-std::pow(j - 30.0, 2) / 60.0);
    auto pot = profile_from(g, v);
    ModelParams params;
    params.potential_scale = 5.0;
    auto trajectory = run_migration(10, pot, params, 0.2, 0.1);
    for (const auto& frame : trajectory) {
        const auto argmax = std::max_element(frame.v.begin(), frame.v.end()) - frame.v.begin();
        EXPECT_NEAR(static_cast<double>(argmax), 30.0, 1.0);
    }
}

TEST(RunMigration, OffCenterPeakDriftsTowardDensityMaximum) {
    const int k = 61;
    const double h = 1.0 / (k + 1);
    auto g = build_price_grid(0, k * h, k);
    std::vector<double> v(k, 0.02);
    for (int j = 0; j < k; ++j) {
        v[static_cast<std::size_t>(j)] += std::exp(-std::pow(j - 12.0, 2) / 20.0);
    }
    auto pot = profile_from(g, v);
    ModelParams params;
    params.potential_scale = 3.0;
    auto trajectory = run_migration(20, pot, params, 0.25, 0.15);
    // ground-state mass sits right of the off-center peak, so the potential
    // center of mass must move right, monotonically over the run
    double prev = center_of_mass(g, trajectory.front().v);
    for (std::size_t s = 1; s < trajectory.size(); ++s) {
        const double com = center_of_mass(g, trajectory[s].v);
        EXPECT_GE(com, prev - 1e-12);
        prev = com;
    }
    EXPECT_GT(center_of_mass(g, trajectory.back().v), center_of_mass(g, trajectory.front().v));
}

} // namespace
