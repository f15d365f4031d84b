#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <vector>

#include "wgc/field.hpp"
#include "wgc/propagators.hpp"
#include "wgc/regions.hpp"

namespace wgc {

/// Discrete quasi-momentum alpha in {0, 1/L, ..., (L-1)/L}^m, stored as the
/// integer numerators.
struct QuasiMomentum {
    std::vector<int> numerators;
    int L = 1;

    std::vector<double> value() const {
        std::vector<double> a(numerators.size());
        for (std::size_t j = 0; j < a.size(); ++j) a[j] = static_cast<double>(numerators[j]) / L;
        return a;
    }
    bool operator<(const QuasiMomentum& o) const { return numerators < o.numerators; }
    bool operator==(const QuasiMomentum& o) const { return numerators == o.numerators && L == o.L; }
};

/// All L^m quasi-momenta, lexicographic in the numerators.
inline std::vector<QuasiMomentum> all_quasi_momenta(int m, int L) {
    std::vector<QuasiMomentum> out;
    std::vector<int> num(m, 0);
    while (true) {
        out.push_back({num, L});
        int j = m - 1;
        while (j >= 0 && ++num[j] == L) num[j--] = 0;
        if (j < 0) break;
    }
    return out;
}

/// Fibers Pi_alpha u on the unit-torus grid, one per quasi-momentum, all in
/// physical representation.
struct FiberBundle {
    GridPtr parent;
    GridPtr fiber;
    std::map<QuasiMomentum, Field> fibers;
};

namespace detail {

/// For a supercell storage index along a Euclidean direction: numerator of
/// alpha and the fiber storage index of k = xi + alpha.
inline std::pair<int, int> fiber_slot(int storage, int N, int L) {
    const int j = WaveguideGrid::signed_index(storage, N);
    const int a = ((-j) % L + L) % L;
    const int k = (j + a) / L;
    return {a, WaveguideGrid::storage_index(k, N / L)};
}

}  // namespace detail

/// Partial Floquet-Bloch transform
///   (Pi_alpha u)(x, y) = e^{i alpha.x} sum_{k in {0..L-1}^m} e^{2 pi i alpha.k} u(x + 2 pi k, y).
/// Computed by re-indexing supercell Fourier coefficients: the fiber
/// coefficient at k = xi + alpha equals L^m * u_hat(xi).
inline FiberBundle floquet_forward(const Field& u) {
    const auto& g = u.grid();
    FiberBundle b;
    b.parent = u.grid_ptr();
    b.fiber = g.fiber_grid();
    const int L = g.L();
    const int m = g.m();
    const double scale = std::pow(static_cast<double>(L), m);
    const Field U = as_spectral(u);

    std::map<std::vector<int>, Field> spectral;
    for (const auto& q : all_quasi_momenta(m, L))
        spectral.emplace(q.numerators, Field(b.fiber, Representation::Spectral));
    std::vector<int> num(m), fidx(g.dim());
    g.for_each_index([&](std::size_t flat, const std::vector<int>& idx) {
        for (int j = 0; j < g.dim(); ++j) {
            if (j < m) {
                const auto [a, k] = detail::fiber_slot(idx[j], g.N(j), L);
                num[j] = a;
                fidx[j] = k;
            } else {
                fidx[j] = idx[j];
            }
        }
        spectral.at(num)[b.fiber->flatten(fidx)] = scale * U[flat];
    });
    for (auto& [n, F] : spectral) b.fibers.emplace(QuasiMomentum{n, L}, to_physical(F));
    return b;
}

/// Inverse of floquet_forward. Requires every fiber to be present.
inline Field floquet_inverse(const FiberBundle& b) {
    const auto& g = *b.parent;
    const int L = g.L();
    const int m = g.m();
    for (const auto& q : all_quasi_momenta(m, L))
        if (!b.fibers.count(q))
            throw ContractError("floquet_inverse: missing fiber for quasi-momentum numerators " +
                                [&] {
                                    std::string s;
                                    for (int v : q.numerators) s += std::to_string(v) + " ";
                                    return s;
                                }());
    std::map<std::vector<int>, Field> spectral;
    for (const auto& [q, f] : b.fibers) spectral.emplace(q.numerators, as_spectral(f));
    const double inv = std::pow(static_cast<double>(L), -m);
    Field U(b.parent, Representation::Spectral);
    std::vector<int> num(m), fidx(g.dim());
    g.for_each_index([&](std::size_t flat, const std::vector<int>& idx) {
        for (int j = 0; j < g.dim(); ++j) {
            if (j < m) {
                const auto [a, k] = detail::fiber_slot(idx[j], g.N(j), L);
                num[j] = a;
                fidx[j] = k;
            } else {
                fidx[j] = idx[j];
            }
        }
        U[flat] = inv * spectral.at(num)[b.fiber->flatten(fidx)];
    });
    return to_physical(U);
}

/// max_alpha || Pi_alpha(e^{itLap} u) - e^{itH_alpha}(Pi_alpha u) ||_{L^2(fiber)}.
inline double fiber_commutes_with_flow(const Field& u, double t) {
    const FiberBundle lhs = floquet_forward(linear_propagate(u, t));
    const FiberBundle rhs = floquet_forward(u);
    double worst = 0.0;
    for (const auto& [q, f] : rhs.fibers) {
        const auto alpha = q.value();
        const Field evolved = twisted_propagate(f, alpha, t);
        worst = std::max(worst, l2_norm_physical(lhs.fibers.at(q) - evolved));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Stationary (resolvent) estimate experiments

struct EigenspaceRow {
    double lambda = 0.0;       // eigenvalue of the Laplacian, -|xi|^2
    int dimension = 0;
    double worst_ratio = 0.0;  // max ||u|| / ||u||_{L^2(Omega)} over the eigenspace
    double empirical_c = 0.0;  // running maximum
};

struct InhomogeneousRow {
    double lambda = 0.0;
    double ratio = 0.0;  // ||u|| / (||f|| + ||u||_{L^2(Omega)}), f = (Lap - lambda) u
    double empirical_c = 0.0;
};

struct ResolventReport {
    std::vector<EigenspaceRow> eigenspaces;
    std::vector<InhomogeneousRow> inhomogeneous;
    double omega_measure = 0.0;
    double max_eigen_ratio() const {
        double m = 0.0;
        for (const auto& r : eigenspaces) m = std::max(m, r.worst_ratio);
        return m;
    }
};

/// Smallest eigenvalue, over a set of lattice modes, of the Hermitian matrix
/// A_ij = w_hat(xi_i - xi_j) where w_hat are the normalized Fourier
/// coefficients of a physical weight; this is min ||u||_w^2 / ||u||^2 over
/// the span. Also returns the minimizing coefficient vector.
inline std::pair<double, Eigen::VectorXcd> weighted_min_rayleigh(const WaveguideGrid& g,
                                                                 const Field& weight_hat,
                                                                 const std::vector<std::vector<int>>& modes) {
    const int k = static_cast<int>(modes.size());
    Eigen::MatrixXcd A(k, k);
    std::vector<int> diff(g.dim());
    for (int a = 0; a < k; ++a) {
        for (int b = 0; b < k; ++b) {
            for (int j = 0; j < g.dim(); ++j)
                diff[j] = WaveguideGrid::storage_index(modes[a][j] - modes[b][j], g.N(j));
            A(a, b) = weight_hat[g.flatten(diff)];
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(A);
    return {es.eigenvalues()(0), es.eigenvectors().col(0)};
}

/// Groups lattice modes (signed indices) by |xi|^2 for |xi|^2 <= cap.
inline std::map<double, std::vector<std::vector<int>>> lattice_eigenspaces(const WaveguideGrid& g,
                                                                           double cap) {
    std::map<double, std::vector<std::vector<int>>> spaces;
    const auto& xi2 = g.frequency_squared();
    g.for_each_index([&](std::size_t flat, const std::vector<int>& idx) {
        if (xi2[flat] > cap + 1e-9) return;
        std::vector<int> k(g.dim());
        for (int j = 0; j < g.dim(); ++j) k[j] = WaveguideGrid::signed_index(idx[j], g.N(j));
        // Exact key: |xi|^2 * L^2 is an integer.
        const double key = std::round(xi2[flat] * g.L() * g.L()) / (g.L() * g.L());
        spaces[key].push_back(std::move(k));
    });
    return spaces;
}

struct ResolventOptions {
    double cap = 100.0;        // largest |xi|^2 considered
    int probes = 0;            // inhomogeneous-family samples
    unsigned long seed = 1;
    int probe_band = 4;        // band limit (signed index) of random probes
};

/// Empirical stationary-estimate constants for the region's sharp indicator.
/// Family (a): for each lattice eigenvalue, the worst ratio over the
/// eigenspace via a dense generalized Rayleigh quotient. Family (b): random
/// band-limited u and random lambda in [-cap, 0].
inline ResolventReport resolvent_ratio(const GridPtr& grid, const ControlRegion& region,
                                       const ResolventOptions& opt = {}) {
    const auto& g = *grid;
    const CutoffChi ind = CutoffChi::sharp_indicator(region, grid);
    ResolventReport rep;
    double count = 0.0;
    for (const auto& v : ind.samples.values()) count += v.real();
    rep.omega_measure = count * g.cell_volume();
    if (count == 0.0) throw ContractError("resolvent_ratio: region has zero grid measure");
    const Field ind_hat = to_spectral(ind.samples);

    double running = 0.0;
    for (const auto& [xi2, modes] : lattice_eigenspaces(g, opt.cap)) {
        const auto [mu, vec] = weighted_min_rayleigh(g, ind_hat, modes);
        const double ratio = mu > 0.0 ? 1.0 / std::sqrt(mu) : std::numeric_limits<double>::infinity();
        running = std::max(running, ratio);
        rep.eigenspaces.push_back({-xi2, static_cast<int>(modes.size()), ratio, running});
    }

    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> lam(-opt.cap, 0.0);
    running = 0.0;
    for (int p = 0; p < opt.probes; ++p) {
        Field U(grid, Representation::Spectral);
        g.for_each_index([&](std::size_t flat, const std::vector<int>& idx) {
            bool inside = true;
            for (int j = 0; j < g.dim(); ++j)
                inside = inside && std::abs(WaveguideGrid::signed_index(idx[j], g.N(j))) <= opt.probe_band;
            if (inside) U[flat] = cplx(normal(rng), normal(rng));
        });
        const double lambda = lam(rng);
        Field F = U;
        const auto& x2 = g.frequency_squared();
        for (std::size_t i = 0; i < F.size(); ++i) F[i] *= -x2[i] - lambda;
        const double ratio = sobolev_norm(U, 0.0) /
                             (sobolev_norm(F, 0.0) + weighted_l2_norm(to_physical(U), ind.samples));
        running = std::max(running, ratio);
        rep.inhomogeneous.push_back({lambda, ratio, running});
    }
    return rep;
}

}  // namespace wgc
