#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "wgc/krylov.hpp"
#include "wgc/observability.hpp"
#include "wgc/propagators.hpp"

namespace wgc {

struct HumSolveConfig {
    GramianSpec gramian;
    double tolerance = 1e-10;
    int max_iterations = 500;

    double s() const { return gramian.s; }

    void validate() const {
        require(tolerance > 0.0 && tolerance < 1.0, "hum: tolerance must lie in (0, 1)");
        require(max_iterations >= 1, "hum: max_iterations must be at least 1");
        gramian.validate();
    }
};

struct HumResult {
    Field w0;
    bool converged = false;
    int iterations = 0;
    double relative_residual = 0.0;
    std::vector<double> history;
};

/// Solves G w0 = -target through the symmetrized system
///   (1-Lap)^{s/2} G (1-Lap)^{s/2} y = -(1-Lap)^{s/2} target,  w0 = (1-Lap)^{s/2} y,
/// by conjugate gradients in L^2. The residual is therefore measured in H^s.
inline HumResult hum_solve(const Field& target, const Gramian& G, double tolerance = 1e-10,
                           int max_iterations = 500) {
    require(same_grid(target.grid_ptr(), G.grid_ptr()), "hum_solve: grid mismatch");
    const double s = G.spec().s;
    const Multiplier lift = bessel_multiplier(G.grid_ptr(), s);
    Field b = as_spectral(target);
    b *= -1.0;
    lift.apply_in_place(b);
    auto apply = [&](const Field& y) {
        Field x = y;
        lift.apply_in_place(x);
        Field r = G.apply(x);
        lift.apply_in_place(r);
        return r;
    };
    krylov::CgOptions opt;
    opt.tolerance = tolerance;
    opt.max_iterations = max_iterations;
    auto cg = krylov::conjugate_gradient(apply, b, Field(G.grid_ptr(), Representation::Spectral),
                                         detail::l2_inner, opt);
    HumResult out;
    out.w0 = std::move(cg.x);
    lift.apply_in_place(out.w0);
    out.converged = cg.converged;
    out.iterations = cg.iterations;
    out.relative_residual = cg.relative_residual;
    out.history = std::move(cg.history);
    return out;
}

inline HumResult hum_solve(const Field& target, const HumSolveConfig& cfg) {
    cfg.validate();
    return hum_solve(target, Gramian(cfg.gramian), cfg.tolerance, cfg.max_iterations);
}

/// phi(t) chi (1-Lap)^{-s} (phi(t) chi g): the control form applied to g.
inline Field control_form(const Field& g, const CutoffChi& chi, double phi_t, const Multiplier& smooth) {
    if (phi_t == 0.0) return Field::zeros(g.grid_ptr());
    Field x = pointwise_product(as_physical(g), chi.samples);
    Field X = to_spectral(x);
    smooth.apply_in_place(X);
    x = to_physical(X);
    return pointwise_product(x, chi.samples) *= phi_t * phi_t;
}

/// Linear Duhamel formula on the quadrature nodes:
///   Psi(T) = e^{iTLap} [ psi0 - i sum_j weight_j e^{-it_j Lap} source(t_j) ].
inline Field linear_duhamel(const Field& psi0, const SourceSchedule& source, const TimeQuadrature& q) {
    Field acc = as_spectral(psi0);
    if (!source.is_zero()) {
        for (int j = 0; j < q.size(); ++j) {
            Field f = to_spectral(source(q.nodes[j], psi0.grid_ptr()));
            free_flow_in_place(f, -q.nodes[j]);
            acc.axpy(-imag_unit * q.weights[j], f);
        }
    }
    free_flow_in_place(acc, q.T);
    return acc;
}

/// Duhamel backward from u(T) = uT: u(0) = e^{-iTLap} uT + i sum_j weight_j e^{-it_j Lap} source(t_j).
inline Field backward_duhamel(const Field& uT, const SourceSchedule& source, const TimeQuadrature& q) {
    Field acc = as_spectral(uT);
    free_flow_in_place(acc, -q.T);
    if (!source.is_zero()) {
        for (int j = 0; j < q.size(); ++j) {
            Field f = to_spectral(source(q.nodes[j], uT.grid_ptr()));
            free_flow_in_place(f, -q.nodes[j]);
            acc.axpy(imag_unit * q.weights[j], f);
        }
    }
    return acc;
}

struct FixedPointRow {
    int sweep = 0;
    int cg_iterations = 0;
    double cg_residual = 0.0;
    double update_norm = 0.0;  // ||Psi0^{k+1} - Psi0^k||_{H^s}
    double defect_norm = 0.0;  // ||u0 - u^k(0)||_{H^s}
    bool applied = false;      // false on the converged (last) sweep
};

struct ControlSolution {
    Field w0;
    Field psi0;
    SourceSchedule source;
    double T = 0.0;
    double s = 0.0;
    std::vector<double> cg_history;
    int cg_iterations = 0;
    std::vector<FixedPointRow> fixed_point;
    double contraction_factor = 0.0;
    double initial_norm = 0.0;   // ||u0||_{H^s}
    double final_norm = 0.0;     // ||u(T)||_{H^s} (null control)
    double target_error = 0.0;   // ||u(T) - u_f||_{H^s} (exact control)
    double refined_final_norm = 0.0;  // linear: Duhamel on the doubled quadrature
    double junction_max = 0.0;        // exact control: max |f| at T/2 +- dt
    bool converged = false;
    std::string status;
    Field final_state;
    std::optional<Trajectory> trajectory;  // certification run, when requested
};

/// HUM linear null control. The forward solve is the Duhamel formula on the
/// Gramian's own quadrature; a second evaluation on the doubled quadrature
/// measures the quadrature error.
inline ControlSolution linear_null_control(const Field& u0, const HumSolveConfig& cfg) {
    cfg.validate();
    const Gramian G(cfg.gramian);
    ControlSolution sol;
    sol.T = cfg.gramian.T;
    sol.s = cfg.s();
    sol.psi0 = u0;
    sol.initial_norm = sobolev_norm(u0, sol.s);
    const HumResult h = hum_solve(u0, G, cfg.tolerance, cfg.max_iterations);
    sol.w0 = h.w0;
    sol.cg_history = h.history;
    sol.cg_iterations = h.iterations;
    sol.converged = h.converged;
    sol.source = make_hum_source(h.w0, cfg.gramian.chi, cfg.gramian.phi, sol.s);
    const Field psiT = linear_duhamel(u0, sol.source, cfg.gramian.quadrature);
    sol.final_norm = sobolev_norm(psiT, sol.s);
    sol.refined_final_norm =
        sobolev_norm(linear_duhamel(u0, sol.source, cfg.gramian.quadrature.doubled()), sol.s);
    sol.final_state = to_physical(psiT);
    sol.status = h.converged ? "ok" : "conjugate gradient did not converge";
    return sol;
}

/// <B f, S w0> and <i R(f), w0> on the shared quadrature, where
/// B f(t) = phi chi (1-Lap)^{-s} phi chi f(t), S w0 (t) = e^{itLap} w0 and
/// R(f) = -u(0) for the backward solution of i u_t + Lap u = B f, u(T) = 0.
struct DualityResult {
    cplx lhs = 0.0;
    cplx rhs = 0.0;
    double discrepancy = 0.0;  // |lhs - rhs| / max(|lhs|, |rhs|), 0 when both vanish
};

inline DualityResult duality_check(const SourceSchedule& f, const Field& w0, const GramianSpec& spec) {
    spec.validate();
    const auto& grid = spec.grid_ptr();
    const Multiplier smooth = bessel_multiplier(grid, -2.0 * spec.s);
    const CutoffChi chi = spec.chi;
    const TimeCutoff phi = spec.phi;
    const SourceSchedule Bf([&, chi, phi](double t) {
        return control_form(f(t, grid), chi, phi(t), smooth);
    });
    const auto& q = spec.quadrature;
    DualityResult out;
    std::vector<cplx> terms(q.size());
    for (int j = 0; j < q.size(); ++j)
        terms[j] = q.weights[j] * duality_pairing(Bf(q.nodes[j], grid), linear_propagate(w0, q.nodes[j]));
    out.lhs = pairwise_sum<cplx>(0, terms.size(), [&](std::size_t j) { return terms[j]; });
    Field R = backward_duhamel(Field::zeros(grid, Representation::Spectral), Bf, q);
    R *= -1.0;
    out.rhs = duality_pairing(R * imag_unit, w0);
    const double scale = std::max(std::abs(out.lhs), std::abs(out.rhs));
    out.discrepancy = scale > 0.0 ? std::abs(out.lhs - out.rhs) / scale : 0.0;
    return out;
}

struct FixedPointConfig {
    double eta = 1.0;
    double delta = 1.0;
    int max_sweeps = 30;
    double tolerance = 1e-10;  // on the update norm relative to ||u0||_{H^s}
    double relaxation = 1.0;
    int divergence_window = 3;

    void validate() const {
        require(eta > 0.0, "fixed point: eta must be positive");
        require(delta > 0.0, "fixed point: delta must be positive");
        require(tolerance > 0.0, "fixed point: tolerance must be positive");
        require(relaxation > 0.0 && relaxation <= 1.0, "fixed point: relaxation must lie in (0, 1]");
        require(max_sweeps >= 1, "fixed point: max_sweeps must be at least 1");
    }
};

/// Midpoint-rule Gramian matched to the Strang step: nodes at the step
/// midpoints of a solver with the given dt on [0, T].
inline GramianSpec matched_gramian(const CutoffChi& chi, const TimeCutoff& phi, double s, double T, double dt) {
    const int n = std::max(8, static_cast<int>(std::llround(T / std::abs(dt))));
    return GramianSpec::make(chi, phi, s, TimeQuadrature::make(QuadratureRule::Midpoint, T, n));
}

/// Nonlinear null control by the initial-datum fixed point
///   Psi0 <- Psi0 + rho (u0 - u(0)),
/// u the backward solution of i u_t + Lap u + eps |u|^2 u = source(Psi0) from u(T) = 0.
/// The HUM quadrature is replaced by the midpoint rule on the solver's step
/// grid, so with the nonlinearity disabled the first sweep reproduces the
/// linear control. A forward solve from u0 certifies ||u(T)||.
inline ControlSolution nonlinear_null_control(const Field& u0, const NlsParams& nls, const FixedPointConfig& fp,
                                              const HumSolveConfig& hum, SolveOptions certify = {}) {
    nls.validate();
    fp.validate();
    const double s = hum.s();
    const double T = hum.gramian.T;
    ControlSolution sol;
    sol.T = T;
    sol.s = s;
    sol.initial_norm = sobolev_norm(u0, s);
    if (sol.initial_norm > fp.delta)
        throw ContractError("nonlinear_null_control: ||u0||_{H^s} = " + std::to_string(sol.initial_norm) +
                            " exceeds the smallness requirement delta = " + std::to_string(fp.delta));
    HumSolveConfig cfg = hum;
    cfg.gramian = matched_gramian(hum.gramian.chi, hum.gramian.phi, s, T, nls.dt);
    cfg.gramian.threads = hum.gramian.threads;
    cfg.validate();
    const Gramian G(cfg.gramian);
    NlsParams back = nls;
    back.dt = T / cfg.gramian.quadrature.size();

    Field psi0 = as_spectral(u0);
    HumResult h = hum_solve(psi0, G, cfg.tolerance, cfg.max_iterations);
    sol.cg_iterations += h.iterations;
    sol.cg_history = h.history;
    Field w0 = h.w0;
    const double scale = std::max(sol.initial_norm, std::numeric_limits<double>::min());
    int growth = 0;
    double prev_update = 0.0;
    sol.status = "max sweeps reached";
    for (int k = 1; k <= fp.max_sweeps; ++k) {
        FixedPointRow row;
        row.sweep = k;
        row.cg_iterations = h.iterations;
        row.cg_residual = h.relative_residual;
        const SourceSchedule src = make_hum_source(w0, cfg.gramian.chi, cfg.gramian.phi, s);
        Field u_start;
        if (sol.initial_norm == 0.0) {
            u_start = Field::zeros(u0.grid_ptr(), Representation::Spectral);
        } else {
            const auto traj = nls_solve(Field::zeros(u0.grid_ptr()), T, 0.0, back, src,
                                        SolveOptions{{}, false, false});
            u_start = as_spectral(traj.final_state());
        }
        Field defect = as_spectral(u0) - u_start;
        row.defect_norm = sobolev_norm(defect, s);
        defect *= fp.relaxation;
        row.update_norm = sobolev_norm(defect, s);
        if (k > 1 && prev_update > 0.0)
            sol.contraction_factor = std::max(sol.contraction_factor, row.update_norm / prev_update);
        growth = (k > 1 && row.update_norm > prev_update) ? growth + 1 : 0;
        prev_update = row.update_norm;
        // A converged sweep leaves Psi0 and w0 untouched.
        row.applied = row.update_norm > fp.tolerance * scale;
        sol.fixed_point.push_back(row);
        if (!row.applied) {
            sol.converged = true;
            sol.status = "ok";
            break;
        }
        psi0 += defect;
        h = hum_solve(defect, G, cfg.tolerance, cfg.max_iterations);
        w0 += h.w0;
        sol.cg_iterations += h.iterations;
        if (sobolev_norm(psi0, s) > fp.eta) {
            sol.status = "iterate left the ball of radius eta";
            break;
        }
        if (growth >= fp.divergence_window) {
            sol.status = "diverged: update norm grew " + std::to_string(growth) + " consecutive sweeps";
            break;
        }
    }
    sol.w0 = w0;
    sol.psi0 = to_physical(psi0);
    sol.source = make_hum_source(w0, cfg.gramian.chi, cfg.gramian.phi, s);
    if (sol.initial_norm == 0.0) {
        sol.final_state = Field::zeros(u0.grid_ptr());
        return sol;
    }
    const bool keep = certify.every_step || !certify.checkpoints.empty();
    certify.diagnostics = certify.diagnostics && keep;
    auto fwd = nls_solve(u0, 0.0, T, back, sol.source, certify);
    sol.final_state = fwd.final_state();
    sol.final_norm = sobolev_norm(sol.final_state, s);
    if (keep) sol.trajectory = std::move(fwd);
    return sol;
}

// ---------------------------------------------------------------------------
// Decomposition u = v + Psi

/// Pointwise max of | |Psi+v|^2 (Psi+v) - (|Psi|^2 Psi + 2|Psi|^2 v + Psi^2 conj(v) + F(Psi, v)) |,
/// F(Psi, v) = |v|^2 v + 2|v|^2 Psi + v^2 conj(Psi), relative to max (|Psi| + |v|)^3.
inline double cubic_expansion_residual(const Field& psi, const Field& v) {
    const Field P = as_physical(psi);
    const Field V = as_physical(v);
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < P.size(); ++i) {
        const cplx a = P[i], b = V[i], u = a + b;
        const cplx F = std::norm(b) * b + 2.0 * std::norm(b) * a + b * b * std::conj(a);
        const cplx rhs = std::norm(a) * a + 2.0 * std::norm(a) * b + a * a * std::conj(b) + F;
        worst = std::max(worst, std::abs(std::norm(u) * u - rhs));
        scale = std::max(scale, std::pow(std::abs(a) + std::abs(b), 3));
    }
    return scale > 0.0 ? worst / scale : 0.0;
}

struct VEquationReport {
    double max_residual = 0.0;    // max_k ||residual_k||_{L^2}
    double max_nonlinear = 0.0;   // max_k ||eps |u_k|^2 u_k||_{L^2}
    double relative = 0.0;        // max_residual / max_nonlinear
    double expansion = 0.0;       // cubic expansion identity, pointwise relative
    double dt = 0.0;
};

/// Residual of  i v_t + Lap v + eps(|Psi|^2 Psi + 2|Psi|^2 v + Psi^2 conj(v)) + eps F(Psi, v)
/// with v = u - Psi, both trajectories recorded at every step of the same
/// uniform grid. The time derivative is a centred difference in the
/// interaction picture,
///   i v_t + Lap v ~ e^{-ih Lap} i (v_{k+1} - e^{2ih Lap} v_{k-1}) / (2h),
/// which is second order and does not difference the stiff linear part.
/// With dealiasing the nonlinear term is projected like the solver does.
inline VEquationReport v_equation_residual(const Trajectory& psi, const Trajectory& u, const NlsParams& nls) {
    require(psi.times.size() == u.times.size() && psi.times.size() >= 3,
            "v_equation_residual: trajectories must have the same number (>= 3) of checkpoints");
    for (std::size_t k = 0; k < psi.times.size(); ++k)
        require(std::abs(psi.times[k] - u.times[k]) <= 1e-12 * std::max(1.0, std::abs(u.times[k])),
                "v_equation_residual: misaligned checkpoints");
    const double h = u.times[1] - u.times[0];
    for (std::size_t k = 1; k < u.times.size(); ++k)
        require(std::abs(u.times[k] - u.times[k - 1] - h) <= 1e-9 * std::abs(h),
                "v_equation_residual: checkpoints must be uniformly spaced");
    VEquationReport rep;
    rep.dt = h;
    const auto& grid = u.states.front().grid_ptr();
    const auto mask = detail::dealias_mask(*grid);
    std::vector<Field> v;
    v.reserve(u.states.size());
    for (std::size_t k = 0; k < u.states.size(); ++k) v.push_back(u.states[k] - psi.states[k]);
    for (std::size_t k = 0; k < u.states.size(); ++k)
        rep.expansion = std::max(rep.expansion, cubic_expansion_residual(psi.states[k], v[k]));
    for (std::size_t k = 1; k + 1 < u.states.size(); ++k) {
        Field back = as_spectral(v[k - 1]);
        free_flow_in_place(back, 2.0 * h);
        Field d = as_spectral(v[k + 1]) - back;
        free_flow_in_place(d, -h);
        d *= imag_unit / (2.0 * h);

        const Field& P = psi.states[k];
        const Field& V = v[k];
        Field n(grid, Representation::Physical);
        for (std::size_t i = 0; i < n.size(); ++i) {
            const cplx a = P[i], b = V[i];
            const cplx F = std::norm(b) * b + 2.0 * std::norm(b) * a + b * b * std::conj(a);
            n[i] = static_cast<double>(nls.epsilon) *
                   (std::norm(a) * a + 2.0 * std::norm(a) * b + a * a * std::conj(b) + F);
        }
        Field N = to_spectral(n);
        if (nls.nonlinear && nls.dealias)
            for (std::size_t i = 0; i < N.size(); ++i)
                if (!mask[i]) N[i] = 0.0;
        if (!nls.nonlinear) N *= 0.0;
        rep.max_nonlinear = std::max(rep.max_nonlinear, sobolev_norm(N, 0.0));
        d += N;
        rep.max_residual = std::max(rep.max_residual, sobolev_norm(d, 0.0));
    }
    rep.relative = rep.max_nonlinear > 0.0 ? rep.max_residual / rep.max_nonlinear : rep.max_residual;
    return rep;
}

// ---------------------------------------------------------------------------
// Exact control by time reversal

/// Glued control on [0, T]: f1 on [0, T/2], f2(t) = conj(g(T - t)) on (T/2, T],
/// with g the null control of the conjugated target on [0, T/2].
inline SourceSchedule glue_controls(const SourceSchedule& f1, const SourceSchedule& g, double T,
                                    const GridPtr& grid) {
    return SourceSchedule([f1, g, T, grid](double t) {
        if (t <= 0.5 * T) return f1(t, grid);
        return conj_field(g(T - t, grid));
    });
}

struct ExactControlResult {
    ControlSolution first;   // null control of u0 on [0, T/2]
    ControlSolution second;  // null control of conj(u_f) on [0, T/2]
    ControlSolution glued;   // certification on [0, T]
};

/// Steers u0 to u_f in time T. Both halves use their own phi_{T/2}, so the
/// glued control vanishes identically on (3T/8, 5T/8).
inline ExactControlResult exact_control(const Field& u0, const Field& uf, double T, const NlsParams& nls,
                                        const FixedPointConfig& fp, const HumSolveConfig& hum) {
    require(same_grid(u0.grid_ptr(), uf.grid_ptr()), "exact_control: u0 and u_f live on different grids");
    const double s = hum.s();
    const double total = sobolev_norm(u0, s) + sobolev_norm(uf, s);
    if (total > fp.delta)
        throw ContractError("exact_control: ||u0|| + ||u_f|| = " + std::to_string(total) +
                            " exceeds the smallness requirement delta = " + std::to_string(fp.delta));
    HumSolveConfig half = hum;
    half.gramian = matched_gramian(hum.gramian.chi, build_phi(0.5 * T), s, 0.5 * T, nls.dt);
    half.gramian.threads = hum.gramian.threads;

    ExactControlResult out;
    out.first = nonlinear_null_control(u0, nls, fp, half);
    if (!out.first.converged) {
        out.glued.status = "first half failed: " + out.first.status;
        return out;
    }
    out.second = nonlinear_null_control(conj_field(as_physical(uf)), nls, fp, half);
    if (!out.second.converged) {
        out.glued.status = "second half failed: " + out.second.status;
        return out;
    }
    const auto& grid = u0.grid_ptr();
    ControlSolution& g = out.glued;
    g.T = T;
    g.s = s;
    g.initial_norm = total;
    g.source = glue_controls(out.first.source, out.second.source, T, grid);
    NlsParams p = nls;
    p.dt = 0.5 * T / half.gramian.quadrature.size();
    const auto fwd = nls_solve(u0, 0.0, T, p, g.source, SolveOptions{{}, false, false});
    g.final_state = fwd.final_state();
    g.final_norm = sobolev_norm(g.final_state, s);
    g.target_error = sobolev_norm(g.final_state - as_physical(uf), s);
    for (double t : {0.5 * T - p.dt, 0.5 * T, 0.5 * T + p.dt})
        g.junction_max = std::max(g.junction_max, max_abs(g.source(t, grid)));
    g.converged = true;
    g.status = "ok";
    return out;
}

}  // namespace wgc
