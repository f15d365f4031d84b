#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "wgc/field.hpp"
#include "wgc/floquet.hpp"
#include "wgc/krylov.hpp"
#include "wgc/propagators.hpp"
#include "wgc/quadrature.hpp"
#include "wgc/regions.hpp"

namespace wgc {

/// Everything that defines the HUM Gramian
///   G w = sum_j weight_j e^{-it_j Lap} [phi_j chi (1-Lap)^{-s} phi_j chi e^{it_j Lap} w],
/// the quadrature realization of  integral_0^T || phi chi e^{itLap} w ||^2_{H^{-s}} dt.
struct GramianSpec {
    double T = 1.0;
    double s = 0.0;
    CutoffChi chi;
    TimeCutoff phi;
    TimeQuadrature quadrature;
    unsigned threads = 0;  // 0: use default_threads()

    const GridPtr& grid_ptr() const { return chi.grid_ptr(); }

    static GramianSpec make(CutoffChi chi, TimeCutoff phi, double s, TimeQuadrature quadrature) {
        GramianSpec spec;
        spec.T = quadrature.T;
        spec.s = s;
        spec.chi = std::move(chi);
        spec.phi = std::move(phi);
        spec.quadrature = std::move(quadrature);
        spec.validate();
        return spec;
    }

    void validate() const {
        require(T > 0.0, "gramian: T must be positive");
        require(quadrature.size() >= 8, "gramian: need at least 8 quadrature nodes");
        double sum = 0.0;
        for (double w : quadrature.weights) {
            require(w > 0.0, "gramian: quadrature weights must be positive");
            sum += w;
        }
        require(std::abs(sum - T) <= 1e-12 * T, "gramian: quadrature weights must sum to T");
        require(std::abs(quadrature.T - T) <= 1e-14 * T, "gramian: quadrature horizon differs from T");
        require(std::abs(phi.T() - T) <= 1e-14 * T, "gramian: time cutoff horizon differs from T");
        require(chi.samples.size() > 0, "gramian: cutoff chi is empty");
    }
};

/// Matrix-free Gramian with cached per-node data.
class Gramian {
public:
    explicit Gramian(GramianSpec spec) : spec_(std::move(spec)) {
        spec_.validate();
        const auto& grid = spec_.grid_ptr();
        phi_ = spec_.phi.at(spec_.quadrature.nodes);
        if (spec_.s != 0.0) {
            smooth_ = bessel_multiplier(grid, -2.0 * spec_.s);
            half_smooth_ = bessel_multiplier(grid, -spec_.s);
        }
        chi_.resize(grid->size());
        for (std::size_t i = 0; i < chi_.size(); ++i) chi_[i] = spec_.chi.samples[i].real();
    }

    const GramianSpec& spec() const { return spec_; }
    const GridPtr& grid_ptr() const { return spec_.grid_ptr(); }

    /// G w, returned in the representation of w.
    Field apply(const Field& w) const {
        if (!same_grid(w.grid_ptr(), grid_ptr())) throw ContractError("gramian_apply: grid mismatch");
        const Field W = as_spectral(w);
        const int nodes = spec_.quadrature.size();
        const int blocks = (nodes + block_size - 1) / block_size;
        std::vector<Field> partial(blocks, Field(grid_ptr(), Representation::Spectral));
        parallel_for(blocks, thread_count(), [&](std::size_t b) {
            const int lo = static_cast<int>(b) * block_size;
            const int hi = std::min(nodes, lo + block_size);
            for (int j = lo; j < hi; ++j) {
                if (phi_[j] == 0.0) continue;
                partial[b].axpy(spec_.quadrature.weights[j], node_term(W, j));
            }
        });
        Field out(grid_ptr(), Representation::Spectral);
        for (const auto& p : partial) out += p;
        return w.is_spectral() ? out : to_physical(out);
    }

    /// sum_j weight_j || phi_j chi e^{it_j Lap} w ||^2_{H^{-s}}, computed directly
    /// from the observation (no adjoint pass).
    double observation_energy(const Field& w) const {
        const Field W = as_spectral(w);
        const int nodes = spec_.quadrature.size();
        std::vector<double> e(nodes, 0.0);
        parallel_for(nodes, thread_count(), [&](std::size_t j) {
            if (phi_[j] == 0.0) return;
            Field v = W;
            free_flow_in_place(v, spec_.quadrature.nodes[j]);
            Field x = to_physical(v);
            for (std::size_t i = 0; i < x.size(); ++i) x[i] *= phi_[j] * chi_[i];
            e[j] = spec_.quadrature.weights[j] * std::pow(sobolev_norm(x, -spec_.s), 2);
        });
        return pairwise_sum<double>(0, e.size(), [&](std::size_t j) { return e[j]; });
    }

private:
    static constexpr int block_size = 8;

    unsigned thread_count() const { return spec_.threads ? spec_.threads : default_threads(); }

    Field node_term(const Field& W, int j) const {
        const double t = spec_.quadrature.nodes[j];
        Field v = W;
        free_flow_in_place(v, t);
        Field x = to_physical(v);
        const double p = phi_[j];
        if (spec_.s == 0.0) {
            for (std::size_t i = 0; i < x.size(); ++i) x[i] *= p * p * chi_[i] * chi_[i];
        } else {
            for (std::size_t i = 0; i < x.size(); ++i) x[i] *= p * chi_[i];
            Field X = to_spectral(x);
            smooth_.apply_in_place(X);
            x = to_physical(X);
            for (std::size_t i = 0; i < x.size(); ++i) x[i] *= p * chi_[i];
        }
        Field out = to_spectral(x);
        free_flow_in_place(out, -t);
        return out;
    }

    GramianSpec spec_;
    std::vector<double> phi_;
    std::vector<double> chi_;
    Multiplier smooth_;
    Multiplier half_smooth_;
};

inline Field gramian_apply(const GramianSpec& spec, const Field& w) { return Gramian(spec).apply(w); }

/// Doubles the node count until the observation energy of every probe changes
/// by less than `tolerance` (relative) or `max_nodes` is reached.
struct QuadratureConvergence {
    GramianSpec spec;
    std::vector<int> node_counts;
    std::vector<double> max_changes;
    bool converged = false;
};

inline QuadratureConvergence converge_quadrature(GramianSpec spec, const std::vector<Field>& probes,
                                                 double tolerance = 1e-10, int max_nodes = 4096) {
    QuadratureConvergence out;
    auto energies = [&](const GramianSpec& sp) {
        Gramian g(sp);
        std::vector<double> e;
        for (const auto& p : probes) e.push_back(g.observation_energy(p));
        return e;
    };
    std::vector<double> prev = energies(spec);
    out.node_counts.push_back(spec.quadrature.size());
    out.max_changes.push_back(std::numeric_limits<double>::infinity());
    while (spec.quadrature.size() * 2 <= max_nodes) {
        GramianSpec next = spec;
        next.quadrature = spec.quadrature.doubled();
        const auto cur = energies(next);
        double change = 0.0;
        for (std::size_t i = 0; i < cur.size(); ++i)
            change = std::max(change, std::abs(cur[i] - prev[i]) / std::max(std::abs(cur[i]), 1e-300));
        spec = std::move(next);
        prev = cur;
        out.node_counts.push_back(spec.quadrature.size());
        out.max_changes.push_back(change);
        if (change < tolerance) {
            out.converged = true;
            break;
        }
    }
    out.spec = std::move(spec);
    return out;
}

// ---------------------------------------------------------------------------

/// Which L^2 observation the constant refers to.
///   Smooth: integral phi^2 || chi e^{itLap} w ||^2 dt with chi sampled on the grid
///           (the s = 0 Gramian itself);
///   Sharp:  integral phi^2 || e^{itLap} w ||^2_{L^2(Omega)} dt with the region
///           integral evaluated exactly on band-limited fields.
enum class Observation { Smooth, Sharp };

inline const char* to_string(Observation o) { return o == Observation::Smooth ? "smooth" : "sharp"; }

/// The s = 0 observation form
///     O w = sum_j weight_j phi_j^2 e^{-it_j Lap} M e^{it_j Lap} w
/// on spectral fields. For Smooth, M multiplies by chi^2 on the grid. For
/// Sharp, M is the exact Galerkin mass form of 1_Omega on the grid's band:
/// products are formed on a grid twice as fine in every direction, which
/// holds the weight's frequencies up to the band difference without aliasing.
class ObservationForm {
public:
    ObservationForm(GramianSpec spec, Observation kind) : spec_(std::move(spec)), kind_(kind) {
        spec_.validate();
        require(spec_.s == 0.0, "observation form: requires s = 0");
        const auto& grid = spec_.grid_ptr();
        const auto& g = *grid;
        phi_ = spec_.phi.at(spec_.quadrature.nodes);
        if (kind_ == Observation::Smooth) {
            Field w2 = spec_.chi.samples;
            for (auto& v : w2.values()) v = cplx(std::norm(v));
            mass_hat_ = to_spectral(w2);
            gramian_ = std::make_shared<Gramian>(spec_);
            return;
        }
        std::vector<int> Np(g.dim());
        for (int j = 0; j < g.dim(); ++j) Np[j] = 2 * g.N(j);
        padded_ = WaveguideGrid::make(g.m(), g.n(), g.L(), Np);
        coefficients_ = std::make_shared<IndicatorCoefficients>(spec_.chi.region);
        Field W(padded_, Representation::Spectral);
        std::vector<int> k(g.dim());
        padded_->for_each_index([&](std::size_t flat, const std::vector<int>& idx) {
            for (int j = 0; j < g.dim(); ++j) k[j] = WaveguideGrid::signed_index(idx[j], Np[j]);
            W[flat] = mass_coefficient(k);
        });
        weight_ = to_physical(W);
        pad_.resize(g.size());
        g.for_each_index([&](std::size_t flat, const std::vector<int>& idx) {
            for (int j = 0; j < g.dim(); ++j)
                k[j] = WaveguideGrid::storage_index(WaveguideGrid::signed_index(idx[j], g.N(j)), Np[j]);
            pad_[flat] = padded_->flatten(k);
        });
    }

    const GramianSpec& spec() const { return spec_; }
    const GridPtr& grid_ptr() const { return spec_.grid_ptr(); }
    Observation kind() const { return kind_; }

    /// Matrix element <e_a, M e_b> / |V| for the signed index difference d = a - b.
    cplx mass_coefficient(const std::vector<int>& d) const {
        const auto& g = *grid_ptr();
        if (kind_ == Observation::Smooth) {
            std::vector<int> idx(d.size());
            for (int j = 0; j < g.dim(); ++j) idx[j] = WaveguideGrid::storage_index(d[j], g.N(j));
            return mass_hat_[g.flatten(idx)];
        }
        std::vector<double> kappa(d.size());
        for (int j = 0; j < g.dim(); ++j) {
            if (g.is_euclidean(j)) {
                // The region is 2pi-periodic: only integer frequencies survive.
                if (d[j] % g.L() != 0) return 0.0;
                kappa[j] = d[j] / g.L();
            } else {
                kappa[j] = d[j];
            }
        }
        return (*coefficients_)(kappa, g.m());
    }

    /// Time weights weight_j * phi_j^2.
    std::vector<double> time_weights() const {
        std::vector<double> w(phi_.size());
        for (std::size_t j = 0; j < w.size(); ++j) w[j] = spec_.quadrature.weights[j] * phi_[j] * phi_[j];
        return w;
    }

    Field apply(const Field& w) const {
        if (!same_grid(w.grid_ptr(), grid_ptr())) throw ContractError("observation form: grid mismatch");
        if (kind_ == Observation::Smooth) return gramian_->apply(w);
        const Field W = as_spectral(w);
        const int nodes = spec_.quadrature.size();
        const int blocks = (nodes + block_size - 1) / block_size;
        std::vector<Field> partial(blocks, Field(grid_ptr(), Representation::Spectral));
        const auto tw = time_weights();
        const unsigned threads = spec_.threads ? spec_.threads : default_threads();
        parallel_for(blocks, threads, [&](std::size_t b) {
            const int lo = static_cast<int>(b) * block_size;
            const int hi = std::min(nodes, lo + block_size);
            for (int j = lo; j < hi; ++j) {
                if (tw[j] == 0.0) continue;
                const double t = spec_.quadrature.nodes[j];
                Field v = W;
                free_flow_in_place(v, t);
                Field P(padded_, Representation::Spectral);
                for (std::size_t i = 0; i < v.size(); ++i) P[pad_[i]] = v[i];
                Field x = to_physical(P);
                for (std::size_t i = 0; i < x.size(); ++i) x[i] *= weight_[i].real();
                const Field X = to_spectral(x);
                for (std::size_t i = 0; i < v.size(); ++i) v[i] = X[pad_[i]];
                free_flow_in_place(v, -t);
                partial[b].axpy(tw[j], v);
            }
        });
        Field out(grid_ptr(), Representation::Spectral);
        for (const auto& p : partial) out += p;
        return w.is_spectral() ? out : to_physical(out);
    }

private:
    static constexpr int block_size = 8;
    GramianSpec spec_;
    Observation kind_;
    std::vector<double> phi_;
    std::shared_ptr<Gramian> gramian_;
    Field mass_hat_;
    GridPtr padded_;
    std::shared_ptr<IndicatorCoefficients> coefficients_;
    Field weight_;
    std::vector<std::size_t> pad_;
};

/// Two-level preconditioner for an observation form: an exact (Cholesky)
/// inverse of the form restricted to the low-frequency modes of each Floquet
/// fiber, and the constant diagonal on the remaining modes. The form never
/// couples different fibers because the region is 2pi-periodic.
class CoarsePreconditioner {
public:
    CoarsePreconditioner(const ObservationForm& form, double radius, int max_per_fiber) {
        const auto& g = *form.grid_ptr();
        const auto tw = form.time_weights();
        const auto& nodes = form.spec().quadrature.nodes;
        double total = 0.0;
        for (double w : tw) total += w;
        diagonal_ = total * std::real(form.mass_coefficient(std::vector<int>(g.dim(), 0)));

        std::map<std::vector<int>, std::vector<std::pair<double, std::size_t>>> fibers;
        const auto& xi2 = g.frequency_squared();
        g.for_each_index([&](std::size_t flat, const std::vector<int>& idx) {
            double r2 = 0.0;
            std::vector<int> key(g.m());
            for (int j = 0; j < g.dim(); ++j) {
                const int k = WaveguideGrid::signed_index(idx[j], g.N(j));
                r2 += std::pow(k / (0.5 * g.N(j)), 2);
                if (j < g.m()) key[j] = ((-k) % g.L() + g.L()) % g.L();
            }
            if (r2 <= radius * radius) fibers[key].push_back({xi2[flat], flat});
        });
        for (auto& [key, modes] : fibers) {
            std::stable_sort(modes.begin(), modes.end(),
                             [](const auto& a, const auto& b) { return a.first < b.first; });
            if (static_cast<int>(modes.size()) > max_per_fiber) modes.resize(max_per_fiber);
            Block blk;
            const int n = static_cast<int>(modes.size());
            std::vector<std::vector<int>> k(n, std::vector<int>(g.dim()));
            for (int a = 0; a < n; ++a) {
                blk.index.push_back(modes[a].second);
                const auto idx = g.unflatten(modes[a].second);
                for (int j = 0; j < g.dim(); ++j) k[a][j] = WaveguideGrid::signed_index(idx[j], g.N(j));
            }
            const int nt = static_cast<int>(tw.size());
            Eigen::MatrixXcd E(n, nt);
            for (int a = 0; a < n; ++a)
                for (int j = 0; j < nt; ++j) E(a, j) = std::polar(std::sqrt(tw[j]), nodes[j] * modes[a].first);
            Eigen::MatrixXcd A = E * E.adjoint();
            std::vector<int> d(g.dim());
            for (int b = 0; b < n; ++b) {
                for (int a = 0; a < n; ++a) {
                    for (int j = 0; j < g.dim(); ++j) d[j] = k[a][j] - k[b][j];
                    A(a, b) *= form.mass_coefficient(d);
                }
            }
            blk.llt.compute(A);
            if (blk.llt.info() != Eigen::Success) {
                ++failed_;
                continue;
            }
            coarse_ += n;
            blocks_.push_back(std::move(blk));
        }
    }

    Field operator()(const Field& r) const {
        require(r.is_spectral(), "preconditioner: spectral residual expected");
        Field out = r;
        if (diagonal_ > 0.0) out *= 1.0 / diagonal_;
        for (const auto& blk : blocks_) {
            const int n = static_cast<int>(blk.index.size());
            Eigen::VectorXcd v(n);
            for (int a = 0; a < n; ++a) v(a) = r[blk.index[a]];
            const Eigen::VectorXcd y = blk.llt.solve(v);
            for (int a = 0; a < n; ++a) out[blk.index[a]] = y(a);
        }
        return out;
    }

    int coarse_size() const { return coarse_; }
    int failed_blocks() const { return failed_; }

private:
    struct Block {
        std::vector<std::size_t> index;
        Eigen::LLT<Eigen::MatrixXcd> llt;
    };
    std::vector<Block> blocks_;
    double diagonal_ = 0.0;
    int coarse_ = 0;
    int failed_ = 0;
};

struct ObservabilityOptions {
    Observation observation = Observation::Smooth;
    double tolerance = 1e-10;       // eigen-solver target, residual relative to ||G||_est
    double residual_factor = 1e-8;  // acceptance bound on the Ritz residual
    int max_iterations = 400;
    double coarse_radius = 1.0;     // coarse modes: sum_j (k_j / (N_j/2))^2 <= radius^2
    int max_coarse = 4096;          // per fiber
    unsigned long seed = 7;
};

struct ObservabilityReport {
    Observation observation = Observation::Smooth;
    bool observable = false;
    double lambda_min = 0.0;
    double c_obs = 0.0;           // 1 / lambda_min
    double residual = 0.0;        // ||G y - lambda y|| / ||y||
    double norm_estimate = 0.0;   // ||G||_est
    int iterations = 0;
    int applications = 0;
    int coarse_size = 0;
    Field extremal_mode;  // least observable direction (unit L^2 norm)
    std::string message;
};

namespace detail {

inline Field random_spectral_field(const GridPtr& grid, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    Field F(grid, Representation::Spectral);
    for (auto& v : F.values()) v = cplx(normal(rng), normal(rng));
    return F;
}

inline cplx l2_inner(const Field& a, const Field& b) { return sobolev_inner(a, b, 0.0); }

}  // namespace detail

/// Smallest eigenvalue of the s = 0 observation form by preconditioned LOBPCG
/// (two-level preconditioner above). C_obs is 1 / lambda_min. A vanishing or
/// numerically singular form is reported as an observability failure rather
/// than thrown.
inline ObservabilityReport observability_constant(const GramianSpec& spec, const ObservabilityOptions& opt = {}) {
    require(spec.s == 0.0, "observability_constant: requires s = 0");
    const ObservationForm form(spec, opt.observation);
    ObservabilityReport rep;
    rep.observation = opt.observation;
    std::mt19937_64 rng(opt.seed);
    auto inner = detail::l2_inner;
    auto applyG = [&](const Field& v) { return form.apply(v); };

    // Norm estimate from a short Lanczos run.
    {
        krylov::LanczosOptions lo;
        lo.max_steps = 12;
        lo.tolerance = 1e-3;
        const auto top = krylov::lanczos_largest(applyG, detail::random_spectral_field(form.grid_ptr(), rng), inner, lo);
        rep.norm_estimate = top.ritz_value;
        rep.applications += top.steps;
    }
    if (!(rep.norm_estimate > 1e-300)) {
        rep.message = "observability failure at this resolution: Gramian vanishes";
        rep.extremal_mode = Field::zeros(form.grid_ptr(), Representation::Spectral);
        return rep;
    }

    const CoarsePreconditioner precond(form, opt.coarse_radius, opt.max_coarse);
    rep.coarse_size = precond.coarse_size();
    krylov::LobpcgOptions lo;
    lo.tolerance = opt.tolerance * rep.norm_estimate;
    lo.max_iterations = opt.max_iterations;
    const Field start = precond(detail::random_spectral_field(form.grid_ptr(), rng));
    auto res = krylov::lobpcg_smallest(applyG, precond, start, inner, lo);
    rep.iterations = res.iterations;
    rep.applications += res.applications;
    rep.lambda_min = res.value;
    rep.residual = res.residual;
    rep.extremal_mode = std::move(res.vector);
    if (!(rep.lambda_min > 1e-12 * rep.norm_estimate)) {
        rep.message = "observability failure at this resolution: lambda_min numerically zero";
        if (precond.failed_blocks() > 0) rep.message += " (coarse block not positive definite)";
        return rep;
    }
    rep.c_obs = 1.0 / rep.lambda_min;
    rep.observable = rep.residual <= opt.residual_factor * rep.norm_estimate;
    rep.message = rep.observable ? "ok" : "Ritz residual above tolerance";
    return rep;
}

// ---------------------------------------------------------------------------

struct WeakObservabilityRow {
    double hs_norm_sq = 0.0;        // ||u0||^2_{H^s}
    double observed = 0.0;          // integral ||chi e^{itLap} u0||^2_{H^s} dt
    double lower_norm_sq = 0.0;     // ||u0||^2_{H^{s-1}}
};

struct WeakObservabilityReport {
    std::vector<WeakObservabilityRow> rows;
    double c0 = 0.0;
    double c = 0.0;
    double identity_residual = 0.0;  // max relative residual of the commutator identity
    bool all_hold = false;

    /// ||u0||^2_{H^s} <= 2 C0 observed + 2 C0 C ||u0||^2_{H^{s-1}} for every row.
    bool holds_with(double c0_, double c_) const {
        for (const auto& r : rows) {
            const double rhs = 2.0 * c0_ * r.observed + 2.0 * c0_ * c_ * r.lower_norm_sq;
            if (r.hs_norm_sq > rhs * (1.0 + 1e-12)) return false;
        }
        return true;
    }
};

/// Weak observability in H^s (s >= 1) on a probe set: records the three
/// quantities per probe, fits the smallest scaling of a least-squares
/// (C0, C) that makes every inequality hold, and checks the operator identity
///   chi e^{itLap} (1-Lap)^{s/2} u0 = (1-Lap)^{s/2} chi e^{itLap} u0 + [chi, (1-Lap)^{s/2}] e^{itLap} u0
/// at every quadrature node. The time cutoff is not applied here.
inline WeakObservabilityReport weak_observability_check(const GramianSpec& spec, const std::vector<Field>& probes) {
    require(spec.s >= 1.0, "weak_observability_check: requires s >= 1");
    WeakObservabilityReport rep;
    const double s = spec.s;
    const auto& q = spec.quadrature;
    for (const auto& u0 : probes) {
        WeakObservabilityRow row;
        row.hs_norm_sq = std::pow(sobolev_norm(u0, s), 2);
        row.lower_norm_sq = std::pow(sobolev_norm(u0, s - 1.0), 2);
        const Field lifted = bessel_potential(as_spectral(u0), s);
        for (int j = 0; j < q.size(); ++j) {
            const Field evolved = as_physical(linear_propagate(u0, q.nodes[j]));
            const Field observed = pointwise_product(evolved, spec.chi.samples);
            row.observed += q.weights[j] * std::pow(sobolev_norm(observed, s), 2);

            const Field lhs = pointwise_product(as_physical(linear_propagate(lifted, q.nodes[j])), spec.chi.samples);
            Field rhs = as_physical(bessel_potential(observed, s));
            rhs += commutator_apply(spec.chi, s, evolved);
            const double scale = std::max(l2_norm_physical(lhs), 1e-300);
            rep.identity_residual = std::max(rep.identity_residual, l2_norm_physical(lhs - rhs) / scale);
        }
        rep.rows.push_back(row);
    }
    // Least squares for A ~ a B + b C with a, b >= 0.
    double bb = 0, bc = 0, cc = 0, ab = 0, ac = 0;
    for (const auto& r : rep.rows) {
        bb += r.observed * r.observed;
        bc += r.observed * r.lower_norm_sq;
        cc += r.lower_norm_sq * r.lower_norm_sq;
        ab += r.hs_norm_sq * r.observed;
        ac += r.hs_norm_sq * r.lower_norm_sq;
    }
    double a = 0.0, b = 0.0;
    const double det = bb * cc - bc * bc;
    if (det > 1e-14 * bb * cc) {
        a = (ab * cc - ac * bc) / det;
        b = (bb * ac - bc * ab) / det;
    }
    if (!(a > 0.0) || b < 0.0) {
        a = bb > 0.0 ? ab / bb : 0.0;
        b = 0.0;
    }
    if (a > 0.0) {
        double kappa = 0.0;
        for (const auto& r : rep.rows)
            kappa = std::max(kappa, r.hs_norm_sq / (a * r.observed + b * r.lower_norm_sq));
        a *= kappa;
        b *= kappa;
        rep.c0 = 0.5 * a;
        rep.c = b / a;
        rep.all_hold = rep.holds_with(rep.c0, rep.c);
    }
    return rep;
}

/// Per lattice eigenvalue -|xi|^2 <= cap: the minimum over the eigenspace of
/// integral phi^2 dt * ||chi u||^2 / ||u||^2 (the Gramian restricted to the
/// eigenspace, where e^{itLap} acts as a scalar).
struct EigenmodeObservationRow {
    double lambda = 0.0;
    int dimension = 0;
    double min_observation = 0.0;
};

inline std::vector<EigenmodeObservationRow> eigenmode_observation_table(const GramianSpec& spec, double cap) {
    const auto& g = *spec.grid_ptr();
    Field w2 = spec.chi.samples;
    for (auto& v : w2.values()) v = cplx(std::norm(v));
    const Field w_hat = to_spectral(w2);
    double phi_sq = 0.0;
    const auto phi = spec.phi.at(spec.quadrature.nodes);
    for (int j = 0; j < spec.quadrature.size(); ++j) phi_sq += spec.quadrature.weights[j] * phi[j] * phi[j];
    std::vector<EigenmodeObservationRow> rows;
    for (const auto& [xi2, modes] : lattice_eigenspaces(g, cap)) {
        const auto [mu, vec] = weighted_min_rayleigh(g, w_hat, modes);
        rows.push_back({-xi2, static_cast<int>(modes.size()), phi_sq * mu});
    }
    return rows;
}

/// ||[chi, (1-Lap)^{s/2}] e_k|| / ||e_k|| for plane waves e_k along one
/// direction, with the least-squares slope of log norm against log |xi|.
/// The commutator has order s - 1.
struct CommutatorSweep {
    std::vector<double> frequencies;
    std::vector<double> norms;
    double slope = 0.0;
};

inline CommutatorSweep commutator_growth(const CutoffChi& chi, double s, int direction, const std::vector<int>& ks) {
    const auto& grid = chi.grid_ptr();
    require(direction >= 0 && direction < grid->dim(), "commutator_growth: direction out of range");
    CommutatorSweep out;
    std::vector<double> lx, ly;
    for (int k : ks) {
        require(k != 0 && 2 * std::abs(k) < grid->N(direction), "commutator_growth: frequency not resolved");
        std::vector<int> idx(grid->dim(), 0);
        idx[direction] = k;
        const Field e = to_physical(Field::mode(grid, idx));
        const double n = l2_norm_physical(commutator_apply(chi, s, e)) / l2_norm_physical(e);
        const double xi = std::abs(k) / (grid->is_euclidean(direction) ? static_cast<double>(grid->L()) : 1.0);
        out.frequencies.push_back(xi);
        out.norms.push_back(n);
        lx.push_back(std::log(xi));
        ly.push_back(std::log(n));
    }
    if (lx.size() >= 2) {
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i], my += ly[i];
        mx /= lx.size();
        my /= ly.size();
        double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sxy += (lx[i] - mx) * (ly[i] - my);
            sxx += (lx[i] - mx) * (lx[i] - mx);
        }
        out.slope = sxy / sxx;
    }
    return out;
}

}  // namespace wgc
