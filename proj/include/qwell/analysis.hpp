#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "qwell/error.hpp"
#include "qwell/potential.hpp"
#include "qwell/solver.hpp"

namespace qwell {

struct BarrierLevel {
    double price = 0;
    double prominence = 0;
    int bin = 0;
};

/// Potential peaks acting as support/resistance, sorted by price.
struct BarrierSet {
    std::vector<BarrierLevel> levels;
    double min_prominence = 0;
};

/// Local maxima of V with topographic prominence >= min_prominence on the
/// normalized 0..1 scale. A peak with no higher terrain on either side takes
/// its full height as prominence. Plateau peaks report their center bin.
inline BarrierSet detect_barriers(const PotentialProfile& potential, double min_prominence) {
    if (min_prominence <= 0 || min_prominence > 1) {
        fail("bad_argument", "min_prominence must lie in (0, 1]");
    }
    const auto& v = potential.v;
    const int k = static_cast<int>(v.size());
    BarrierSet out;
    out.min_prominence = min_prominence;

    int i = 0;
    while (i < k) {
        int e = i;
        while (e + 1 < k && v[static_cast<std::size_t>(e + 1)] == v[static_cast<std::size_t>(i)]) ++e;
        const bool rises_left = i > 0 && v[static_cast<std::size_t>(i - 1)] < v[static_cast<std::size_t>(i)];
        const bool falls_right = e < k - 1 && v[static_cast<std::size_t>(e + 1)] < v[static_cast<std::size_t>(i)];
        if (rises_left && falls_right) {
            const double height = v[static_cast<std::size_t>(i)];
            bool left_higher = false, right_higher = false;
            double left_saddle = height, right_saddle = height;
            for (int j = i - 1; j >= 0; --j) {
                const double x = v[static_cast<std::size_t>(j)];
                if (x > height) {
                    left_higher = true;
                    break;
                }
                left_saddle = std::min(left_saddle, x);
            }
            for (int j = e + 1; j < k; ++j) {
                const double x = v[static_cast<std::size_t>(j)];
                if (x > height) {
                    right_higher = true;
                    break;
                }
                right_saddle = std::min(right_saddle, x);
            }
            double prominence;
            if (!left_higher && !right_higher) {
                prominence = height;
            } else if (left_higher && right_higher) {
                prominence = height - std::max(left_saddle, right_saddle);
            } else {
                prominence = height - (left_higher ? left_saddle : right_saddle);
            }
            if (prominence >= min_prominence) {
                const int center = (i + e) / 2;
                out.levels.push_back({potential.grid.center(center), prominence, center});
            }
        }
        i = e + 1;
    }
    return out;
}

struct BreakoutProbabilities {
    double up = 0;
    double down = 0;
    double inside = 0;
};

/// Mass below the lowest barrier, above the highest, and in between.
inline BreakoutProbabilities breakout_direction(const ForecastDensity& density,
                                                const BarrierSet& barriers) {
    if (barriers.levels.size() < 2) fail("bad_argument", "no channel: need at least 2 barriers");
    const int lower = barriers.levels.front().bin;
    const int upper = barriers.levels.back().bin;
    BreakoutProbabilities p;
    for (int j = 0; j < density.grid.k; ++j) {
        const double m = density.mass[static_cast<std::size_t>(j)];
        if (j < lower) {
            p.down += m;
        } else if (j > upper) {
            p.up += m;
        } else {
            p.inside += m;
        }
    }
    return p;
}

struct BinRange {
    int lo = 0;
    int hi = 0;
};

struct TunnelingResult {
    double transmission = 0;
    double reflection = 0;
    double energy = 0;
};

/// Plane-wave scattering across the region's bins treated as constant
/// potential slabs of width 2eps; the media outside the region sit flat at
/// the region's edge levels. Transfer matrices are accumulated right to left.
inline TunnelingResult transmission_reflection(const PotentialProfile& potential,
                                               const ModelParams& params, double energy,
                                               const BinRange& region) {
    params.check();
    const int k = static_cast<int>(potential.v.size());
    if (region.lo < 0 || region.hi >= k || region.lo > region.hi) {
        fail("bad_argument", "region out of grid bounds");
    }
    if (energy <= 0) fail("bad_argument", "energy must be positive");

    const double h = potential.grid.bin_width();
    auto level = [&](int j) {
        return params.potential_scale * potential.v[static_cast<std::size_t>(j)];
    };
    const double u_left = level(region.lo);
    const double u_right = level(region.hi);
    if (energy == u_left || energy == u_right) {
        fail("bad_argument", "energy coincides with an asymptotic level");
    }
    if (energy <= u_left) fail("domain_error", "no open channel");

    using cplx = std::complex<double>;
    auto wavenumber = [&](double u) {
        cplx k2(2.0 * params.mass * (energy - u) / (params.hbar_eff * params.hbar_eff), 0.0);
        cplx kk = std::sqrt(k2);
        if (std::abs(kk) == 0.0) kk = cplx(0.0, 1e-30);
        return kk; // real for open channels, i*kappa under the barrier
    };

    const cplx k_l = wavenumber(u_left);
    const cplx k_r = wavenumber(u_right);

    // Coefficients (A, B) of psi = A e^{ikx} + B e^{-ikx}, phase referenced
    // locally at each interface; rightmost medium carries (1, 0).
    cplx a(1.0, 0.0), b(0.0, 0.0);
    auto cross_interface = [&](cplx k_from_left, cplx k_to_right) {
        const cplx ratio = k_to_right / k_from_left;
        const cplx a2 = 0.5 * ((1.0 + ratio) * a + (1.0 - ratio) * b);
        const cplx b2 = 0.5 * ((1.0 - ratio) * a + (1.0 + ratio) * b);
        a = a2;
        b = b2;
    };

    cplx k_right_medium = k_r;
    for (int j = region.hi; j >= region.lo; --j) {
        const cplx kj = wavenumber(level(j));
        cross_interface(kj, k_right_medium);
        const cplx fwd = std::exp(cplx(0.0, -1.0) * kj * h);
        const cplx bwd = std::exp(cplx(0.0, 1.0) * kj * h);
        if (std::abs(fwd * bwd - 1.0) > 1e-8) {
            fail("numeric_error", "flux conservation lost in slab " + std::to_string(j));
        }
        a *= fwd;
        b *= bwd;
        k_right_medium = kj;
    }
    cross_interface(k_l, k_right_medium);

    if (std::abs(a) == 0.0) fail("numeric_error", "singular transfer matrix");
    const cplx t = 1.0 / a;
    const cplx r = b / a;

    TunnelingResult result;
    result.energy = energy;
    result.transmission = (k_r.real() / k_l.real()) * std::norm(t);
    result.reflection = std::norm(r);
    if (std::abs(result.transmission + result.reflection - 1.0) > 1e-8) {
        fail("numeric_error", "T + R deviates from 1 beyond tolerance");
    }
    return result;
}

/// One constructor/destructor update: the density's bulk builds potential
/// where it sits while the rest of the profile decays.
inline PotentialProfile trend_migration_step(const PotentialProfile& potential,
                                             const ForecastDensity& density, double build_rate,
                                             double decay_rate) {
    if (build_rate < 0 || build_rate > 1 || decay_rate < 0 || decay_rate > 1) {
        fail("bad_argument", "rates must lie in [0, 1]");
    }
    if (!potential.grid.same_grid(density.grid)) fail("bad_argument", "grid mismatch");

    const double max_mass = *std::max_element(density.mass.begin(), density.mass.end());
    PotentialProfile next;
    next.grid = potential.grid;
    next.v.resize(potential.v.size());
    for (std::size_t j = 0; j < potential.v.size(); ++j) {
        const double drive = max_mass > 0 ? density.mass[j] / max_mass : 0.0;
        next.v[j] = (1.0 - decay_rate) * potential.v[j] + build_rate * drive;
    }
    const double vmax = *std::max_element(next.v.begin(), next.v.end());
    next.normalization = potential.normalization * vmax;
    if (vmax > 0) {
        for (double& x : next.v) x /= vmax;
    }
    return next;
}

/// Alternates a ground-state solve with a migration step. The returned
/// trajectory includes the initial profile, so it has steps + 1 frames.
inline std::vector<PotentialProfile> run_migration(int steps, const PotentialProfile& initial,
                                                   const ModelParams& params, double build_rate,
                                                   double decay_rate) {
    if (steps < 1) fail("bad_argument", "steps must be >= 1");
    std::vector<PotentialProfile> trajectory;
    trajectory.reserve(static_cast<std::size_t>(steps) + 1);
    trajectory.push_back(initial);
    for (int s = 0; s < steps; ++s) {
        const auto& current = trajectory.back();
        const auto hamiltonian = assemble_hamiltonian(current.grid, current, params);
        const auto solution = solve_eigenpairs(hamiltonian, current.grid, 1, params);
        const auto density = forecast_density(solution, GroundState{});
        trajectory.push_back(trend_migration_step(current, density, build_rate, decay_rate));
    }
    return trajectory;
}

} // namespace qwell
