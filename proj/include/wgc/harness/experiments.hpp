#pragma once

#include <cmath>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "wgc/floquet.hpp"
#include "wgc/harness/config.hpp"
#include "wgc/harness/manifest.hpp"
#include "wgc/hum.hpp"
#include "wgc/observability.hpp"
#include "wgc/xsb.hpp"

namespace wgc::harness {

inline std::string join_dims(const std::vector<int>& N) {
    std::string s;
    for (std::size_t i = 0; i < N.size(); ++i) s += (i ? "x" : "") + std::to_string(N[i]);
    return s;
}

inline std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

struct RunContext {
    const ExperimentConfig& cfg;
    RunWriter& out;
};

namespace experiments {

inline void assert_le(RunWriter& out, const std::string& name, double value, double bound) {
    out.invariant(name, std::isfinite(value) && value <= bound, sci(value) + " <= " + sci(bound));
}

inline GramianSpec gramian_for(const ExperimentConfig& c, const CutoffChi& chi, double T) {
    GramianSpec spec = GramianSpec::make(chi, make_phi(c, T), c.solver.s,
                                         TimeQuadrature::make(c.time.rule, T, c.time.Nt));
    return spec;
}

/// Doubles the quadrature on a few random probes when the config asks for it.
inline GramianSpec maybe_converge(const ExperimentConfig& c, GramianSpec spec, RunWriter& out,
                                  std::vector<Field> probes = {}) {
    if (!c.time.converge) return spec;
    for (int i = 0; i < 3; ++i)
        probes.push_back(random_data(spec.grid_ptr(), c.data.band, 1.0, 0.0, c.seed, 100 + i));
    auto conv = out.timed("quadrature", [&] {
        return converge_quadrature(spec, probes, c.time.converge_tolerance, c.time.max_nodes);
    });
    out.invariant("quadrature converged (T=" + format_number(spec.T) + ")", conv.converged,
                  "Nt=" + std::to_string(conv.spec.quadrature.size()) + " change " + sci(conv.max_changes.back()));
    return conv.spec;
}

// ---------------------------------------------------------------------------

inline ObservabilityOptions observability_options(const ExperimentConfig& c, Observation kind) {
    ObservabilityOptions opt;
    opt.observation = kind;
    opt.coarse_radius = c.option<double>("coarse_radius", opt.coarse_radius);
    opt.max_coarse = c.option<int>("max_coarse", opt.max_coarse);
    opt.max_iterations = c.option<int>("lobpcg_max_iterations", opt.max_iterations);
    opt.seed = c.seed;
    return opt;
}

inline void observability_sweep(RunContext ctx) {
    const auto& c = ctx.cfg;
    auto& out = ctx.out;
    if (c.solver.s != 0.0) throw ConfigError("solver.s", "observability-sweep requires s = 0");
    const bool sharp_too = c.option<bool>("sharp_too", !c.sharp_chi);
    const bool refine = c.option<bool>("refine", false);
    const double cap = c.option<double>("eigenmode_cap", 0.0);
    const std::string region_id = c.option<std::string>("region_id", "region");
    CsvTable table({"T", "region", "cutoff", "s", "N", "L", "Nt", "lambda_min", "c_obs", "residual", "iterations",
                    "coarse_size", "observable"});
    CsvTable drift({"T", "cutoff", "c_obs_N", "c_obs_2N", "drift"});

    // "smooth": chi from build_chi, grid Gramian. "sharp": the indicator of
    // Omega, integrated exactly against the trigonometric basis.
    auto chi_for = [&](const std::string& cutoff, const GridPtr& grid) {
        return cutoff == "sharp" ? CutoffChi::sharp_indicator(c.region, grid) : build_chi(c.region, grid);
    };
    auto run_one = [&](const GridPtr& grid, const std::string& cutoff, double T, std::size_t ti, bool dump) {
        GramianSpec spec = maybe_converge(c, gramian_for(c, chi_for(cutoff, grid), T), out);
        const auto kind = cutoff == "sharp" ? Observation::Sharp : Observation::Smooth;
        const auto rep = out.timed("observability " + cutoff + " N=" + join_dims(grid->N()),
                                   [&] { return observability_constant(spec, observability_options(c, kind)); });
        table.row({T, region_id, cutoff, c.solver.s, join_dims(grid->N()), (long long)grid->L(),
                   (long long)spec.quadrature.size(), rep.lambda_min, rep.c_obs, rep.residual,
                   (long long)rep.iterations, (long long)rep.coarse_size, (long long)rep.observable});
        if (dump) out.write_field("extremal_T" + std::to_string(ti) + "_" + cutoff + ".wgf", rep.extremal_mode);
        return rep;
    };

    const GridPtr grid = make_grid(c.grid);
    for (std::size_t ti = 0; ti < c.time.T.size(); ++ti) {
        const double T = c.time.T[ti];
        std::vector<std::string> cutoffs = {c.sharp_chi ? "sharp" : "smooth"};
        if (sharp_too) cutoffs.emplace_back("sharp");
        for (const auto& name : cutoffs) {
            const auto rep = run_one(grid, name, T, ti, true);
            const std::string key = "c_obs[" + name + ",T=" + format_number(T) + "]";
            out.summary(key, rep.c_obs);
            out.summary("residual[" + name + ",T=" + format_number(T) + "]", rep.residual);
            if (c.check<bool>("expect_observable", true))
                out.invariant("observable " + name + " T=" + format_number(T), rep.observable, rep.message);
            if (c.checks.contains("max_residual"))
                assert_le(out, "Ritz residual " + name + " T=" + format_number(T), rep.residual,
                          c.check<double>("max_residual", 1e-8));
            if (refine) {
                const GridPtr fine = make_grid(c.grid, 2);
                const auto rep2 = run_one(fine, name, T, ti, false);
                const double d = std::abs(rep2.c_obs - rep.c_obs) / rep.c_obs;
                drift.row({T, name, rep.c_obs, rep2.c_obs, d});
                out.summary("c_obs_2N[" + name + ",T=" + format_number(T) + "]", rep2.c_obs);
                out.summary("drift[" + name + ",T=" + format_number(T) + "]", d);
                if (c.checks.contains("max_residual"))
                    assert_le(out, "Ritz residual (2N) " + name + " T=" + format_number(T), rep2.residual,
                              c.check<double>("max_residual", 1e-8));
                if (name == "sharp" || !c.option<bool>("drift_sharp_only", false))
                    assert_le(out, "refinement drift " + name + " T=" + format_number(T), d,
                              c.check<double>("max_drift", 0.10));
            }
        }
        if (cap > 0.0) {
            const auto rows = eigenmode_observation_table(gramian_for(c, make_chi(c, grid), T), cap);
            CsvTable em({"lambda", "dimension", "min_observation"});
            bool positive = true;
            for (const auto& r : rows) {
                em.row({r.lambda, (long long)r.dimension, r.min_observation});
                positive = positive && r.min_observation > 0.0;
            }
            out.write_csv("eigenmodes_T" + std::to_string(ti) + ".csv", em);
            out.invariant("no unobserved eigenmode T=" + format_number(T), positive);
        }
    }
    out.write_csv("obs_sweep.csv", table);
    if (refine) out.write_csv("obs_drift.csv", drift);
}

// ---------------------------------------------------------------------------

inline void stationary_estimate(RunContext ctx) {
    const auto& c = ctx.cfg;
    auto& out = ctx.out;
    ResolventOptions opt;
    opt.cap = c.option<double>("cap", 100.0);
    opt.probes = c.option<int>("probes", 0);
    opt.seed = c.seed;
    opt.probe_band = c.data.band;
    const bool refine = c.option<bool>("refine", false);

    auto emit = [&](const ResolventReport& r, const std::string& suffix) {
        CsvTable e({"lambda", "dimension", "worst_ratio", "empirical_c"});
        for (const auto& row : r.eigenspaces)
            e.row({row.lambda, (long long)row.dimension, row.worst_ratio, row.empirical_c});
        out.write_csv("eigenspaces" + suffix + ".csv", e);
        if (!r.inhomogeneous.empty()) {
            CsvTable h({"lambda", "ratio", "empirical_c"});
            for (const auto& row : r.inhomogeneous) h.row({row.lambda, row.ratio, row.empirical_c});
            out.write_csv("inhomogeneous" + suffix + ".csv", h);
        }
    };
    const auto rep = out.timed("resolvent", [&] { return resolvent_ratio(make_grid(c.grid), c.region, opt); });
    emit(rep, "");
    const double worst = rep.max_eigen_ratio();
    out.summary("max_eigen_ratio", worst);
    out.summary("omega_measure", rep.omega_measure);
    out.invariant("eigenspace ratio finite", std::isfinite(worst), sci(worst));
    if (refine) {
        const auto fine = out.timed("resolvent refined",
                                    [&] { return resolvent_ratio(make_grid(c.grid, 2), c.region, opt); });
        emit(fine, "_2N");
        const double d = std::abs(fine.max_eigen_ratio() - worst) / worst;
        out.summary("max_eigen_ratio_2N", fine.max_eigen_ratio());
        out.summary("drift", d);
        assert_le(out, "refinement drift", d, c.check<double>("max_drift", 0.15));
    }
}

// ---------------------------------------------------------------------------

inline HumSolveConfig hum_config(const ExperimentConfig& c, GramianSpec spec) {
    HumSolveConfig h;
    h.gramian = std::move(spec);
    h.tolerance = c.solver.cg_tolerance;
    h.max_iterations = c.solver.cg_max_iterations;
    return h;
}

inline NlsParams nls_params(const ExperimentConfig& c) {
    NlsParams p;
    p.epsilon = c.solver.epsilon;
    p.dt = c.solver.dt;
    p.dealias = c.solver.dealias;
    p.nonlinear = c.solver.nonlinear;
    return p;
}

inline FixedPointConfig fp_config(const ExperimentConfig& c) {
    FixedPointConfig f;
    f.eta = c.solver.eta;
    f.delta = c.solver.delta;
    f.max_sweeps = c.solver.max_sweeps;
    f.tolerance = c.solver.fp_tolerance;
    f.relaxation = c.solver.relaxation;
    return f;
}

inline void dump_sources(RunWriter& out, const ControlSolution& sol, const GridPtr& grid) {
    const double T = sol.T;
    const double ts[] = {0.0, 0.25 * T, 0.5 * T, 0.75 * T};
    for (int i = 0; i < 4; ++i) out.write_field("source_t" + std::to_string(i) + ".wgf", sol.source(ts[i], grid));
}

inline void linear_null_control_run(RunContext ctx) {
    const auto& c = ctx.cfg;
    auto& out = ctx.out;
    const GridPtr grid = make_grid(c.grid);
    const double T = c.time.T.front();
    const Field u0 = random_data(grid, c.data.band, c.data.amplitude, c.solver.s, c.seed, 1);
    const CutoffChi chi = make_chi(c, grid);
    const GramianSpec spec = maybe_converge(c, gramian_for(c, chi, T), out, {u0});
    const auto sol = out.timed("hum", [&] { return linear_null_control(u0, hum_config(c, spec)); });
    const double rel = sol.initial_norm > 0.0 ? sol.final_norm / sol.initial_norm : sol.final_norm;
    const double rel_refined = sol.initial_norm > 0.0 ? sol.refined_final_norm / sol.initial_norm : sol.refined_final_norm;
    CsvTable t({"T", "s", "Nt", "cg_iterations", "cg_residual", "initial_norm", "final_norm", "relative_final",
                "relative_final_refined"});
    t.row({T, c.solver.s, (long long)spec.quadrature.size(), (long long)sol.cg_iterations,
           sol.cg_history.empty() ? 0.0 : sol.cg_history.back(), sol.initial_norm, sol.final_norm, rel, rel_refined});
    out.write_csv("control.csv", t);
    CsvTable h({"iteration", "relative_residual"});
    for (std::size_t i = 0; i < sol.cg_history.size(); ++i) h.row({(long long)i, sol.cg_history[i]});
    out.write_csv("cg_history.csv", h);
    out.summary("relative_final", rel);
    out.summary("relative_final_refined", rel_refined);
    out.summary("cg_iterations", (long long)sol.cg_iterations);
    out.invariant("conjugate gradient converged", sol.converged, sol.status);
    assert_le(out, "null control reached", rel, c.check<double>("max_relative_final", 1e-6));
    assert_le(out, "null control reached (doubled quadrature)", rel_refined,
              c.check<double>("max_relative_refined", c.check<double>("max_relative_final", 1e-6)));
    if (c.solver.s == 0.0 && c.option<bool>("observability", true)) {
        const auto kind = c.sharp_chi ? Observation::Sharp : Observation::Smooth;
        const auto rep = out.timed("observability",
                                   [&] { return observability_constant(spec, observability_options(c, kind)); });
        CsvTable o({"T", "lambda_min", "c_obs", "residual"});
        o.row({T, rep.lambda_min, rep.c_obs, rep.residual});
        out.write_csv("obs.csv", o);
        out.summary("c_obs", rep.c_obs);
    }
    out.write_field("u0.wgf", u0);
    out.write_field("w0.wgf", sol.w0);
    out.write_field("psiT.wgf", sol.final_state);
    dump_sources(out, sol, grid);
}

// ---------------------------------------------------------------------------

inline CsvTable fixed_point_table(const ControlSolution& sol) {
    CsvTable t({"sweep", "cg_iterations", "cg_residual", "update_norm", "defect_norm", "applied"});
    for (const auto& r : sol.fixed_point)
        t.row({(long long)r.sweep, (long long)r.cg_iterations, r.cg_residual, r.update_norm, r.defect_norm,
               (long long)r.applied});
    return t;
}

inline bool strictly_decreasing(const ControlSolution& sol) {
    for (std::size_t i = 1; i < sol.fixed_point.size(); ++i)
        if (!(sol.fixed_point[i].update_norm < sol.fixed_point[i - 1].update_norm)) return false;
    return true;
}

inline void nonlinear_null_control_run(RunContext ctx) {
    const auto& c = ctx.cfg;
    auto& out = ctx.out;
    const GridPtr grid = make_grid(c.grid);
    const double T = c.time.T.front();
    const Field u0 = random_data(grid, c.data.band, c.data.amplitude, c.solver.s, c.seed, 1);
    const CutoffChi chi = make_chi(c, grid);
    const HumSolveConfig hum = hum_config(c, matched_gramian(chi, make_phi(c, T), c.solver.s, T, c.solver.dt));
    const NlsParams nls = nls_params(c);
    const bool v_check = c.option<bool>("v_residual", false);
    SolveOptions certify;
    certify.every_step = v_check;
    const auto sol = out.timed("fixed point", [&] { return nonlinear_null_control(u0, nls, fp_config(c), hum, certify); });
    const double rel = sol.final_norm / sol.initial_norm;
    out.write_csv("fixed_point.csv", fixed_point_table(sol));
    out.summary("sweeps", (long long)sol.fixed_point.size());
    out.summary("contraction_factor", sol.contraction_factor);
    out.summary("initial_norm", sol.initial_norm);
    out.summary("final_norm", sol.final_norm);
    out.summary("relative_final", rel);
    out.summary("status", sol.status);
    out.invariant("fixed point converged", sol.converged, sol.status);
    assert_le(out, "certified null control", rel, c.check<double>("max_relative_final", 1e-4));
    if (c.check<bool>("require_contraction", true) && sol.fixed_point.size() > 1)
        out.invariant("contraction factor < 1", sol.contraction_factor < 1.0, sci(sol.contraction_factor));
    if (c.check<bool>("require_monotone", true))
        out.invariant("update norms strictly decreasing", strictly_decreasing(sol));

    if (c.option<bool>("linear_limit", false)) {
        NlsParams lin = nls;
        lin.nonlinear = false;
        const auto a = out.timed("linear limit", [&] { return nonlinear_null_control(u0, lin, fp_config(c), hum); });
        const auto b = linear_null_control(u0, hum_config(c, matched_gramian(chi, make_phi(c, T), c.solver.s, T, c.solver.dt)));
        const double diff = sobolev_norm(a.final_state - b.final_state, c.solver.s) / sol.initial_norm;
        const double wdiff = sobolev_norm(a.w0 - b.w0, -c.solver.s) / std::max(sobolev_norm(b.w0, -c.solver.s), 1e-300);
        out.summary("linear_limit_sweeps", (long long)a.fixed_point.size());
        out.summary("linear_limit_state_diff", diff);
        out.summary("linear_limit_control_diff", wdiff);
        out.invariant("linear limit converges in one sweep", a.converged && a.fixed_point.size() == 1);
        assert_le(out, "linear limit matches linear control (state)", diff, c.check<double>("max_linear_limit_diff", 1e-10));
        assert_le(out, "linear limit matches linear control (multiplier)", wdiff,
                  c.check<double>("max_linear_limit_diff", 1e-10));
    }
    if (v_check) {
        NlsParams lin = nls;
        lin.nonlinear = false;
        const auto psi = out.timed("linear trajectory", [&] {
            return nls_solve(sol.psi0, 0.0, T, lin, sol.source, SolveOptions{{}, true, false});
        });
        NlsParams used = nls;
        used.dt = sol.trajectory->step;
        const auto rep = v_equation_residual(psi, *sol.trajectory, used);
        CsvTable v({"dt", "max_residual", "max_nonlinear", "relative", "expansion"});
        v.row({rep.dt, rep.max_residual, rep.max_nonlinear, rep.relative, rep.expansion});
        out.write_csv("v_residual.csv", v);
        out.summary("v_relative", rep.relative);
        out.summary("v_expansion", rep.expansion);
        const double bound = c.check<double>("v_residual_constant", 10.0) * rep.dt * rep.dt;
        assert_le(out, "v-equation residual O(dt^2)", rep.relative, bound);
        assert_le(out, "cubic expansion identity", rep.expansion, 1e-12);
    }
    if (c.option<bool>("halving", false)) {
        const Field half = u0 * 0.5;
        const auto h = out.timed("halved data", [&] { return nonlinear_null_control(half, nls, fp_config(c), hum); });
        out.summary("contraction_factor_half", h.contraction_factor);
        out.invariant("contraction improves when data halves", h.contraction_factor < sol.contraction_factor,
                      sci(h.contraction_factor) + " vs " + sci(sol.contraction_factor));
    }
    out.write_field("u0.wgf", u0);
    out.write_field("psi0.wgf", sol.psi0);
    out.write_field("w0.wgf", sol.w0);
    out.write_field("uT.wgf", sol.final_state);
    dump_sources(out, sol, grid);
}

// ---------------------------------------------------------------------------

inline void exact_control_run(RunContext ctx) {
    const auto& c = ctx.cfg;
    auto& out = ctx.out;
    const GridPtr grid = make_grid(c.grid);
    const double T = c.time.T.front();
    const Field u0 = random_data(grid, c.data.band, c.data.amplitude, c.solver.s, c.seed, 1);
    const Field uf = random_data(grid, c.data.band, c.data.target_amplitude, c.solver.s, c.seed, 2);
    const CutoffChi chi = make_chi(c, grid);
    const HumSolveConfig hum = hum_config(c, matched_gramian(chi, build_phi(T), c.solver.s, T, c.solver.dt));
    const auto res = out.timed("exact control",
                               [&] { return exact_control(u0, uf, T, nls_params(c), fp_config(c), hum); });
    CsvTable t({"half", "sweeps", "contraction_factor", "relative_final", "status"});
    for (const auto* h : {&res.first, &res.second})
        t.row({h == &res.first ? "first" : "second", (long long)h->fixed_point.size(), h->contraction_factor,
               h->initial_norm > 0.0 ? h->final_norm / h->initial_norm : h->final_norm, h->status});
    out.write_csv("exact.csv", t);
    out.write_csv("fixed_point_first.csv", fixed_point_table(res.first));
    out.write_csv("fixed_point_second.csv", fixed_point_table(res.second));
    const double scale = res.glued.initial_norm;
    const double rel = scale > 0.0 ? res.glued.target_error / scale : res.glued.target_error;
    out.summary("status", res.glued.status);
    out.summary("target_error", res.glued.target_error);
    out.summary("relative_error", rel);
    out.summary("junction_max", res.glued.junction_max);
    out.invariant("both halves converged", res.glued.converged, res.glued.status);
    assert_le(out, "target reached", rel, c.check<double>("max_relative_error", 1e-3));
    assert_le(out, "control vanishes at the junction", res.glued.junction_max, c.check<double>("max_junction", 1e-12));
    out.write_field("u0.wgf", u0);
    out.write_field("uf.wgf", uf);
    if (res.glued.converged) out.write_field("uT.wgf", res.glued.final_state);
}

// ---------------------------------------------------------------------------

inline void xsb_checks(RunContext ctx) {
    const auto& c = ctx.cfg;
    auto& out = ctx.out;
    const GridPtr grid = make_grid(c.grid);
    XsbParams p;
    p.s = c.option<double>("s", 1.0);
    p.b = c.option<double>("b", 0.55);
    p.bp = c.option<double>("bp", 0.35);
    p.r = c.option<double>("r", p.s);
    TrilinearOptions topt;
    topt.samples = c.option<int>("samples", 20);
    topt.bands = c.option<std::vector<int>>("bands", {1, 2});
    topt.seed = c.seed;
    topt.Nt = c.option<int>("Nt", 16);
    topt.T_per = c.option<double>("T_per", two_pi);
    const auto tri = out.timed("trilinear", [&] { return trilinear_ratio(grid, p, topt); });
    CsvTable rows({"sample", "band", "estimate", "lhs", "rhs", "ratio"});
    for (const auto& r : tri.rows)
        rows.row({(long long)r.sample, (long long)r.band, to_string(r.estimate), r.lhs, r.rhs, r.ratio});
    out.write_csv("trilinear.csv", rows);
    CsvTable sums({"estimate", "band", "max_ratio", "median_ratio", "degenerate"});
    for (const auto& s : tri.summaries) {
        sums.row({to_string(s.estimate), (long long)s.band, s.max_ratio, s.median_ratio, (long long)s.degenerate});
        out.summary(std::string("max_ratio[") + to_string(s.estimate) + ",band=" + std::to_string(s.band) + "]",
                    s.max_ratio);
    }
    out.write_csv("trilinear_summary.csv", sums);

    GainOptions gopt;
    gopt.P = c.option<double>("gain_window", 16.0);
    gopt.Nt = c.option<int>("gain_samples", 1 << 14);
    const auto gain = out.timed("gain", [&] { return gain_integration_scaling(p, gopt); });
    CsvTable g({"T", "ratio", "normalized"});
    for (const auto& r : gain.rows) g.row({r.T, r.ratio, r.normalized});
    out.write_csv("gain.csv", g);
    out.summary("gain_slope", gain.slope);
    out.summary("gain_expected_slope", gain.expected);
    out.summary("gain_max_normalized", gain.max_normalized);
    const double base = gain.rows.front().normalized;
    assert_le(out, "gain-of-integration normalized ratio bounded", gain.max_normalized / base,
              c.check<double>("max_gain_growth", 4.0));

    // Transference baseline and embedding monotonicity on a random free solution.
    const Field u0 = random_data(grid, c.data.band, 1.0, 0.0, c.seed, 7);
    const auto free = SpaceTimeField::free_solution(u0, topt.T_per, topt.Nt);
    const double base_norm = xsb_norm(free, p.s, 0.0);
    const double expect = sobolev_norm(u0, p.s) * std::sqrt(topt.T_per);
    const double err = std::abs(base_norm - expect) / expect;
    out.summary("transference_error", err);
    assert_le(out, "transference baseline", err, 1e-10);
    std::mt19937_64 rng(c.seed);
    const auto rnd = random_band_limited(grid, topt.T_per, topt.Nt, 2, rng);
    bool mono = true;
    for (double s1 : {0.0, 0.5, 1.0})
        for (double b1 : {-0.35, 0.0, 0.55})
            mono = mono && xsb_norm(rnd, s1, b1) <= xsb_norm(rnd, s1 + 0.5, b1 + 0.2);
    out.invariant("embedding monotonicity", mono);
}

}  // namespace experiments

/// Runs one experiment into `dir`. Returns the process exit code
/// (0 ok, 1 invariant failure or runtime error). Config errors propagate.
inline int run_experiment(const ExperimentConfig& cfg, const fs::path& dir, unsigned threads) {
    default_threads() = std::max(1u, threads);
    RunWriter out(dir);
    RunContext ctx{cfg, out};
    std::string error;
    try {
        switch (cfg.kind) {
            case ExperimentKind::ObservabilitySweep: experiments::observability_sweep(ctx); break;
            case ExperimentKind::StationaryEstimate: experiments::stationary_estimate(ctx); break;
            case ExperimentKind::LinearNullControl: experiments::linear_null_control_run(ctx); break;
            case ExperimentKind::NonlinearNullControl: experiments::nonlinear_null_control_run(ctx); break;
            case ExperimentKind::ExactControl: experiments::exact_control_run(ctx); break;
            case ExperimentKind::XsbChecks: experiments::xsb_checks(ctx); break;
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        error = e.what();
    }
    const bool ok = error.empty() && out.all_passed();
    out.finalize(cfg.raw, error.empty() ? (ok ? "ok" : "invariant-failure") : "error", default_threads(), error);
    return ok ? 0 : 1;
}

}  // namespace wgc::harness
