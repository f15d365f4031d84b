#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wgc/field.hpp"
#include "wgc/regions.hpp"

namespace wgc {

struct Diagnostics {
    std::vector<std::string> warnings;
};

namespace detail {

/// v[flat] *= prod_j phase[j][idx_j] for a row-major grid.
inline void apply_separable(std::vector<cplx>& v, const std::vector<std::vector<cplx>>& phase,
                            const WaveguideGrid& g) {
    const int d = g.dim();
    const int inner = g.N(d - 1);
    const std::size_t outer = g.size() / static_cast<std::size_t>(inner);
    std::vector<int> idx(d - 1, 0);
    const auto& last = phase[d - 1];
    for (std::size_t o = 0; o < outer; ++o) {
        cplx p = 1.0;
        for (int j = 0; j < d - 1; ++j) p *= phase[j][idx[j]];
        cplx* row = v.data() + o * inner;
        for (int i = 0; i < inner; ++i) row[i] *= p * last[i];
        for (int j = d - 2; j >= 0; --j) {
            if (++idx[j] < g.N(j)) break;
            idx[j] = 0;
        }
    }
}

/// Per-direction tables e^{-i t xi_j^2}.
inline std::vector<std::vector<cplx>> free_phase_tables(const WaveguideGrid& g, double t) {
    std::vector<std::vector<cplx>> ph(g.dim());
    for (int j = 0; j < g.dim(); ++j) {
        ph[j].resize(g.N(j));
        for (int i = 0; i < g.N(j); ++i) {
            const double xi = g.frequency(j, i);
            ph[j][i] = std::polar(1.0, -t * xi * xi);
        }
    }
    return ph;
}

}  // namespace detail

/// In-place e^{it Lap} on a spectral field.
inline void free_flow_in_place(Field& F, double t) {
    require(F.is_spectral(), "free flow: in-place application needs spectral field");
    if (t == 0.0) return;
    detail::apply_separable(F.values(), detail::free_phase_tables(F.grid(), t), F.grid());
}

/// Schrodinger group e^{it Lap}: spectral multiplication by e^{-it|xi|^2}.
inline Field linear_propagate(const Field& f, double t) {
    Field F = as_spectral(f);
    free_flow_in_place(F, t);
    return f.is_spectral() ? F : to_physical(F);
}

/// Twisted flow e^{itH_alpha}, H_alpha = (grad_x - i alpha)^2 + Lap_y, on a
/// unit-torus fiber grid (L = 1). Fiber frequency k in Euclidean direction j is
/// read from the alpha-shifted lattice k - alpha in [-N/2, N/2), so the
/// Nyquist column is assigned to +N/2 whenever alpha_j > 0. alpha outside
/// [0,1)^m is reduced mod 1 with a warning.
inline Field twisted_propagate(const Field& f, std::span<const double> alpha, double t,
                               Diagnostics* diag = nullptr) {
    const auto& g = f.grid();
    require(g.L() == 1, "twisted_propagate: field must live on a unit-torus fiber grid (L = 1)");
    require(static_cast<int>(alpha.size()) == g.m(), "twisted_propagate: alpha must have m entries");
    std::vector<double> a(alpha.begin(), alpha.end());
    for (auto& v : a) {
        if (v < 0.0 || v >= 1.0) {
            const double r = v - std::floor(v);
            if (diag) diag->warnings.push_back("twisted_propagate: quasi-momentum " + std::to_string(v) +
                                               " reduced mod 1 to " + std::to_string(r));
            v = r;
        }
    }
    std::vector<std::vector<cplx>> ph(g.dim());
    for (int j = 0; j < g.dim(); ++j) {
        ph[j].resize(g.N(j));
        for (int i = 0; i < g.N(j); ++i) {
            double k = g.frequency(j, i);
            double shift = 0.0;
            if (j < g.m()) {
                shift = a[j];
                if (k - shift < -0.5 * g.N(j)) k += g.N(j);
            }
            const double w = k - shift;
            ph[j][i] = std::polar(1.0, -t * w * w);
        }
    }
    Field F = as_spectral(f);
    detail::apply_separable(F.values(), ph, g);
    return f.is_spectral() ? F : to_physical(F);
}

/// Cubic NLS parameters: i u_t + Lap u + epsilon |u|^2 u = source.
struct NlsParams {
    int epsilon = -1;
    double dt = 1e-3;
    bool dealias = true;
    bool nonlinear = true;

    void validate() const {
        require(epsilon == 1 || epsilon == -1, "nls: epsilon must be +1 or -1");
        require(dt != 0.0 && std::isfinite(dt), "nls: dt must be finite and nonzero");
    }
};

/// Time-dependent source f(t) on the right-hand side, evaluated in physical
/// representation. A default-constructed schedule is identically zero.
class SourceSchedule {
public:
    using Evaluator = std::function<Field(double)>;

    SourceSchedule() = default;
    explicit SourceSchedule(Evaluator fn) : fn_(std::move(fn)) {}

    bool is_zero() const { return !fn_; }
    Field operator()(double t, const GridPtr& grid) const {
        if (!fn_) return Field::zeros(grid);
        return as_physical(fn_(t));
    }

private:
    Evaluator fn_;
};

/// HUM control source phi(t) chi (1-Lap)^{-s} (phi(t) chi (i e^{it Lap} w0)).
inline SourceSchedule make_hum_source(const Field& w0, const CutoffChi& chi, const TimeCutoff& phi,
                                      double s) {
    const Field W = as_spectral(w0);
    const Multiplier smooth = bessel_multiplier(W.grid_ptr(), -2.0 * s);
    return SourceSchedule([W, chi, phi, s, smooth](double t) {
        const double p = phi(t);
        if (p == 0.0) return Field::zeros(W.grid_ptr());
        Field v = W;
        free_flow_in_place(v, t);
        v *= imag_unit * p;
        Field x = pointwise_product(to_physical(v), chi.samples);
        if (s != 0.0) {
            Field X = to_spectral(x);
            smooth.apply_in_place(X);
            x = to_physical(X);
        }
        return pointwise_product(x, chi.samples) *= p;
    });
}

/// Blow-up (non-finite state) during time stepping.
class NlsBlowUp : public NumericalError {
public:
    NlsBlowUp(double time, std::optional<Field> last_good = std::nullopt, double last_good_time = 0.0)
        : NumericalError("nls: non-finite values after step ending at t = " + std::to_string(time)),
          time_(time), last_good_(std::move(last_good)), last_good_time_(last_good_time) {}

    double time() const { return time_; }
    const std::optional<Field>& last_good() const { return last_good_; }
    double last_good_time() const { return last_good_time_; }

private:
    double time_;
    std::optional<Field> last_good_;
    double last_good_time_;
};

namespace detail {

/// 2/3-rule mask: keeps modes with |signed index| <= N/3 in every direction.
inline std::vector<unsigned char> dealias_mask(const WaveguideGrid& g) {
    std::vector<unsigned char> mask(g.size(), 1);
    g.for_each_index([&](std::size_t flat, const std::vector<int>& idx) {
        for (int j = 0; j < g.dim(); ++j) {
            if (3 * std::abs(WaveguideGrid::signed_index(idx[j], g.N(j))) > g.N(j)) {
                mask[flat] = 0;
                return;
            }
        }
    });
    return mask;
}

/// Exact flow of u' = i eps |u|^2 u over time h, optionally with the increment
/// projected by the dealiasing mask.
inline void nonlinear_phase(Field& u, double eps_h, const std::vector<unsigned char>* mask) {
    auto increment = [eps_h](cplx v) {
        const double th = eps_h * std::norm(v);
        const double sh = std::sin(0.5 * th);
        return v * cplx(-2.0 * sh * sh, std::sin(th));
    };
    if (!mask) {
        for (auto& v : u.values()) v += increment(v);
        return;
    }
    Field d(u.grid_ptr(), Representation::Physical);
    for (std::size_t i = 0; i < u.size(); ++i) d[i] = increment(u[i]);
    Field D = to_spectral(d);
    for (std::size_t i = 0; i < D.size(); ++i)
        if (!(*mask)[i]) D[i] = 0.0;
    u += to_physical(D);
}

}  // namespace detail

/// One Strang step from time t to t + dt:
///   half linear flow, half nonlinear phase, source increment -i dt f(t+dt/2),
///   half nonlinear phase, half linear flow.
/// Each factor is inverted by the same factor with -dt, so a step with -dt
/// started at t + dt undoes the step (exactly without dealiasing).
inline Field nls_step(const Field& u, double t, const NlsParams& params, const SourceSchedule& source,
                      const std::vector<unsigned char>* mask_cache = nullptr) {
    params.validate();
    const double dt = params.dt;
    Field U = as_spectral(u);
    free_flow_in_place(U, 0.5 * dt);
    Field phys = to_physical(U);
    std::vector<unsigned char> local_mask;
    const std::vector<unsigned char>* mask = nullptr;
    if (params.nonlinear && params.dealias) {
        if (mask_cache) {
            mask = mask_cache;
        } else {
            local_mask = detail::dealias_mask(u.grid());
            mask = &local_mask;
        }
    }
    const double eps_half = params.epsilon * 0.5 * dt;
    if (params.nonlinear) detail::nonlinear_phase(phys, eps_half, mask);
    if (!source.is_zero()) phys.axpy(-imag_unit * dt, source(t + 0.5 * dt, u.grid_ptr()));
    if (params.nonlinear) detail::nonlinear_phase(phys, eps_half, mask);
    U = to_spectral(phys);
    free_flow_in_place(U, 0.5 * dt);
    if (!all_finite(U)) throw NlsBlowUp(t + dt);
    return u.is_spectral() ? U : to_physical(U);
}

struct TrajectoryRow {
    double t = 0.0;
    double mass = 0.0;
    double h1 = 0.0;
    double max_abs = 0.0;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Field> states;
    std::vector<TrajectoryRow> diagnostics;
    int steps = 0;
    double step = 0.0;  // signed step actually used

    const Field& final_state() const { return states.back(); }
};

struct SolveOptions {
    std::vector<double> checkpoints;  // snapped to the step grid
    bool every_step = false;
    bool diagnostics = true;
};

/// Integrates from t0 to t1 (either direction) with |dt| rounded so that an
/// integer number of steps fits. The initial and final states are always
/// recorded; requested checkpoints are snapped to the nearest step.
inline Trajectory nls_solve(const Field& u0, double t0, double t1, const NlsParams& params,
                            const SourceSchedule& source, const SolveOptions& opts = {}) {
    params.validate();
    require(t0 != t1, "nls_solve: t0 and t1 must differ");
    const double span = t1 - t0;
    const int n = std::max(1, static_cast<int>(std::llround(std::abs(span) / std::abs(params.dt))));
    const double h = span / n;
    NlsParams p = params;
    p.dt = h;

    std::vector<char> record(n + 1, opts.every_step ? 1 : 0);
    record[0] = record[n] = 1;
    for (double tc : opts.checkpoints) {
        require(tc >= std::min(t0, t1) - 1e-12 && tc <= std::max(t0, t1) + 1e-12,
                "nls_solve: checkpoint outside the integration interval");
        const long k = std::clamp<long>(std::lround((tc - t0) / h), 0, n);
        record[k] = 1;
    }
    const auto mask = detail::dealias_mask(u0.grid());

    Trajectory traj;
    traj.steps = n;
    traj.step = h;
    auto push = [&](double t, const Field& u) {
        Field phys = as_physical(u);
        if (opts.diagnostics)
            traj.diagnostics.push_back({t, l2_norm_physical(phys), sobolev_norm(u, 1.0), max_abs(phys)});
        traj.times.push_back(t);
        traj.states.push_back(std::move(phys));
    };
    Field u = as_spectral(u0);
    push(t0, u);
    for (int k = 0; k < n; ++k) {
        const double t = t0 + k * h;
        try {
            u = nls_step(u, t, p, source, &mask);
        } catch (const NlsBlowUp& e) {
            throw NlsBlowUp(e.time(), traj.states.back(), traj.times.back());
        }
        if (record[k + 1]) push(k + 1 == n ? t1 : t0 + (k + 1) * h, u);
    }
    return traj;
}

}  // namespace wgc
