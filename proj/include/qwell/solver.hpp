#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "qwell/error.hpp"
#include "qwell/grid.hpp"
#include "qwell/potential.hpp"

namespace qwell {

/// Dimensionless scales of the market Schrodinger equation. Only the ratio
/// potential_scale * mass * L^2 / hbar_eff^2 shapes the resulting densities.
struct ModelParams {
    double hbar_eff = 1;
    double mass = 1;
    double potential_scale = 1;

    void check() const {
        if (hbar_eff <= 0) fail("bad_argument", "hbar_eff must be positive");
        if (mass <= 0) fail("bad_argument", "mass must be positive");
        if (potential_scale < 0) fail("bad_argument", "potential_scale must be non-negative");
    }
};

struct TridiagonalMatrix {
    std::vector<double> diag; // size k
    std::vector<double> off;  // size k-1

    int size() const { return static_cast<int>(diag.size()); }
};

/// Second-order central-difference Hamiltonian -(hbar^2/2m) psi'' + s*V psi
/// with Dirichlet walls one grid step outside the first and last bin centers.
inline TridiagonalMatrix assemble_hamiltonian(const PriceGrid& grid,
                                              const PotentialProfile& potential,
                                              const ModelParams& params) {
    params.check();
    if (!grid.same_grid(potential.grid)) fail("bad_argument", "potential grid mismatch");
    if (grid.k < 2) fail("bad_argument", "need at least 2 bins");

    const double h = grid.bin_width();
    const double kinetic = params.hbar_eff * params.hbar_eff / (params.mass * h * h);
    TridiagonalMatrix m;
    m.diag.resize(static_cast<std::size_t>(grid.k));
    m.off.assign(static_cast<std::size_t>(grid.k - 1), -0.5 * kinetic);
    for (int j = 0; j < grid.k; ++j) {
        m.diag[static_cast<std::size_t>(j)] =
            kinetic + params.potential_scale * potential.v[static_cast<std::size_t>(j)];
    }
    return m;
}

struct EigenSolution {
    PriceGrid grid;
    std::vector<double> energies;            // ascending
    std::vector<std::vector<double>> states; // states[n][j], sum psi^2 * 2eps = 1
    ModelParams params;
};

namespace detail {

inline double tridiag_norm(const TridiagonalMatrix& m) {
    double norm = 0;
    const int k = m.size();
    for (int i = 0; i < k; ++i) {
        double row = std::abs(m.diag[static_cast<std::size_t>(i)]);
        if (i > 0) row += std::abs(m.off[static_cast<std::size_t>(i - 1)]);
        if (i < k - 1) row += std::abs(m.off[static_cast<std::size_t>(i)]);
        norm = std::max(norm, row);
    }
    return norm;
}

/// Number of eigenvalues of m strictly below x (Sturm sequence count).
inline int sturm_count(const TridiagonalMatrix& m, double x, double anorm) {
    const int k = m.size();
    const double safe = std::numeric_limits<double>::epsilon() * anorm +
                        std::numeric_limits<double>::min();
    int count = 0;
    double q = m.diag[0] - x;
    if (q < 0) ++count;
    for (int i = 1; i < k; ++i) {
        if (std::abs(q) < safe) q = q < 0 ? -safe : safe;
        const double e = m.off[static_cast<std::size_t>(i - 1)];
        q = m.diag[static_cast<std::size_t>(i)] - x - e * e / q;
        if (q < 0) ++count;
    }
    return count;
}

/// n-th smallest eigenvalue (1-based) by bisection on the Sturm count.
inline double bisect_eigenvalue(const TridiagonalMatrix& m, int n, double anorm) {
    double lo = m.diag[0], hi = m.diag[0];
    const int k = m.size();
    for (int i = 0; i < k; ++i) {
        double r = 0;
        if (i > 0) r += std::abs(m.off[static_cast<std::size_t>(i - 1)]);
        if (i < k - 1) r += std::abs(m.off[static_cast<std::size_t>(i)]);
        lo = std::min(lo, m.diag[static_cast<std::size_t>(i)] - r);
        hi = std::max(hi, m.diag[static_cast<std::size_t>(i)] + r);
    }
    const double eps = std::numeric_limits<double>::epsilon();
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (sturm_count(m, mid, anorm) >= n) {
            hi = mid;
        } else {
            lo = mid;
        }
        if (hi - lo <= 2 * eps * std::max(std::abs(lo), std::abs(hi))) break;
    }
    return 0.5 * (lo + hi);
}

/// One inverse-iteration pass: solves (m - lambda I) v = rhs in place via
/// tridiagonal Gaussian elimination with partial pivoting.
inline void shifted_solve(const TridiagonalMatrix& m, double lambda, std::vector<double>& v,
                          double anorm) {
    const int k = m.size();
    std::vector<double> a(static_cast<std::size_t>(k));      // main
    std::vector<double> b(static_cast<std::size_t>(k), 0.0); // first super
    std::vector<double> c(static_cast<std::size_t>(k), 0.0); // second super (fill-in)
    std::vector<double> sub(static_cast<std::size_t>(k), 0.0);
    for (int i = 0; i < k; ++i) {
        a[static_cast<std::size_t>(i)] = m.diag[static_cast<std::size_t>(i)] - lambda;
        if (i < k - 1) b[static_cast<std::size_t>(i)] = m.off[static_cast<std::size_t>(i)];
        if (i > 0) sub[static_cast<std::size_t>(i)] = m.off[static_cast<std::size_t>(i - 1)];
    }
    const double tiny = std::numeric_limits<double>::epsilon() * anorm +
                        std::numeric_limits<double>::min();
    for (int i = 0; i < k - 1; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        if (std::abs(sub[ui + 1]) > std::abs(a[ui])) {
            std::swap(a[ui], sub[ui + 1]);
            std::swap(b[ui], a[ui + 1]);
            std::swap(c[ui], b[ui + 1]);
            std::swap(v[ui], v[ui + 1]);
        }
        if (std::abs(a[ui]) < tiny) a[ui] = a[ui] < 0 ? -tiny : tiny;
        const double f = sub[ui + 1] / a[ui];
        a[ui + 1] -= f * b[ui];
        b[ui + 1] -= f * c[ui];
        v[ui + 1] -= f * v[ui];
    }
    for (int i = k - 1; i >= 0; --i) {
        const auto ui = static_cast<std::size_t>(i);
        if (std::abs(a[ui]) < tiny) a[ui] = a[ui] < 0 ? -tiny : tiny;
        double s = v[ui];
        if (i < k - 1) s -= b[ui] * v[ui + 1];
        if (i < k - 2) s -= c[ui] * v[ui + 2];
        v[ui] = s / a[ui];
    }
}

inline double residual_inf(const TridiagonalMatrix& m, double lambda,
                           const std::vector<double>& v) {
    const int k = m.size();
    double r = 0;
    for (int i = 0; i < k; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        double s = (m.diag[ui] - lambda) * v[ui];
        if (i > 0) s += m.off[ui - 1] * v[ui - 1];
        if (i < k - 1) s += m.off[ui] * v[ui + 1];
        r = std::max(r, std::abs(s));
    }
    return r;
}

} // namespace detail

/// m lowest eigenpairs via Sturm bisection plus inverse iteration.
/// States carry a deterministic sign (first non-negligible component > 0)
/// and are normalized so that sum psi^2 * bin_width = 1.
inline EigenSolution solve_eigenpairs(const TridiagonalMatrix& matrix, const PriceGrid& grid,
                                      int m, const ModelParams& params) {
    const int k = matrix.size();
    if (k != grid.k) fail("bad_argument", "matrix size does not match grid");
    if (m < 1 || m > k) fail("bad_argument", "state count must lie in [1, k]");

    const double anorm = detail::tridiag_norm(matrix);
    const double eps = std::numeric_limits<double>::epsilon();
    const double h = grid.bin_width();

    EigenSolution sol;
    sol.grid = grid;
    sol.params = params;
    sol.energies.reserve(static_cast<std::size_t>(m));
    sol.states.reserve(static_cast<std::size_t>(m));

    const double cluster_tol = 1e3 * eps * std::max(anorm, 1.0);
    for (int n = 1; n <= m; ++n) {
        const double lambda = detail::bisect_eigenvalue(matrix, n, anorm);

        std::vector<double> v(static_cast<std::size_t>(k), 1.0);
        double res = 0;
        int iterations = 0;
        for (int attempt = 0; attempt < 4; ++attempt) {
            // Nudge the shift on retries so a too-exact eigenvalue cannot stall.
            const double shift = lambda + attempt * 10.0 * eps * std::max(anorm, 1.0);
            for (int it = 0; it < 3 + attempt; ++it) {
                ++iterations;
                detail::shifted_solve(matrix, shift, v, anorm);
                // Re-orthogonalize within eigenvalue clusters.
                for (std::size_t p = 0; p < sol.energies.size(); ++p) {
                    if (std::abs(sol.energies[p] - lambda) <= cluster_tol) {
                        double dot = 0;
                        for (int i = 0; i < k; ++i) {
                            dot += v[static_cast<std::size_t>(i)] *
                                   sol.states[p][static_cast<std::size_t>(i)] * h;
                        }
                        for (int i = 0; i < k; ++i) {
                            v[static_cast<std::size_t>(i)] -=
                                dot * sol.states[p][static_cast<std::size_t>(i)];
                        }
                    }
                }
                double vmax = 0;
                for (double x : v) vmax = std::max(vmax, std::abs(x));
                if (vmax == 0) {
                    v.assign(static_cast<std::size_t>(k), 1.0);
                    continue;
                }
                for (double& x : v) x /= vmax;
            }
            res = detail::residual_inf(matrix, lambda, v);
            if (res <= 1e4 * eps * std::max(anorm, 1.0)) break;
        }
        if (res > 1e-8 * std::max(1.0, std::abs(lambda)) && res > 1e6 * eps * anorm) {
            fail("numeric_error", "inverse iteration failed to converge for state " +
                                      std::to_string(n) + " after " + std::to_string(iterations) +
                                      " iterations (residual " + std::to_string(res) + ")");
        }

        double norm2 = 0;
        for (double x : v) norm2 += x * x;
        const double scale = 1.0 / std::sqrt(norm2 * h);
        for (double& x : v) x *= scale;

        const double thresh = 1e-12 * (1.0 / std::sqrt(h));
        for (double x : v) {
            if (std::abs(x) > thresh) {
                if (x < 0) {
                    for (double& y : v) y = -y;
                }
                break;
            }
        }

        sol.energies.push_back(lambda);
        sol.states.push_back(std::move(v));
    }
    return sol;
}

struct GroundState {};
struct BoltzmannMixture {
    double temperature = 1;
};
using ForecastMode = std::variant<GroundState, BoltzmannMixture>;

/// Normalized price-probability mass per bin.
struct ForecastDensity {
    PriceGrid grid;
    std::vector<double> mass;
    ForecastMode mode;
};

/// GroundState: mass_j = psi_1^2 * 2eps. BoltzmannMixture: Boltzmann-weighted
/// sum of |psi_n|^2 over the available states.
inline ForecastDensity forecast_density(const EigenSolution& solution, const ForecastMode& mode) {
    if (solution.states.empty()) fail("bad_argument", "solution has no states");
    const int k = solution.grid.k;
    const double h = solution.grid.bin_width();

    std::vector<double> weights(solution.states.size(), 0.0);
    if (std::holds_alternative<GroundState>(mode)) {
        weights[0] = 1.0;
    } else {
        const auto& boltz = std::get<BoltzmannMixture>(mode);
        if (boltz.temperature <= 0) fail("bad_argument", "temperature must be positive");
        if (solution.states.size() < 2) {
            fail("bad_argument", "Boltzmann mixture needs at least 2 states");
        }
        const double e0 = solution.energies[0];
        double total = 0;
        for (std::size_t n = 0; n < weights.size(); ++n) {
            weights[n] = std::exp(-(solution.energies[n] - e0) / boltz.temperature);
            total += weights[n];
        }
        for (double& w : weights) w /= total;
    }

    ForecastDensity density;
    density.grid = solution.grid;
    density.mode = mode;
    density.mass.assign(static_cast<std::size_t>(k), 0.0);
    for (std::size_t n = 0; n < weights.size(); ++n) {
        if (weights[n] == 0) continue;
        for (int j = 0; j < k; ++j) {
            const auto uj = static_cast<std::size_t>(j);
            density.mass[uj] += weights[n] * solution.states[n][uj] * solution.states[n][uj] * h;
        }
    }
    double total = 0;
    for (double x : density.mass) total += x;
    if (total <= 0) fail("numeric_error", "degenerate forecast density");
    for (double& x : density.mass) x /= total;
    return density;
}

} // namespace qwell
