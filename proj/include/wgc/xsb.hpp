#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "wgc/fft.hpp"
#include "wgc/field.hpp"
#include "wgc/propagators.hpp"

namespace wgc {

/// Samples u(t_k, z), t_k = k T_per / Nt, of a T_per-periodic space-time
/// function. Storage is time-major: value(k, flat).
/// Time convention: u(t) = sum_tau u~(tau) e^{-i tau t}, tau in (2 pi / T_per) Z,
/// so the free flow e^{itLap} e^{i xi.z} sits at tau = |xi|^2.
class SpaceTimeField {
public:
    SpaceTimeField() = default;
    SpaceTimeField(GridPtr grid, double T_per, int Nt)
        : grid_(std::move(grid)), T_per_(T_per), Nt_(Nt), values_(grid_->size() * static_cast<std::size_t>(Nt)) {
        require(T_per > 0.0, "space-time field: T_per must be positive");
        require(Nt >= 8 && Nt % 2 == 0, "space-time field: Nt must be even and at least 8");
    }

    template <class Fn>
    static SpaceTimeField from_function(GridPtr grid, double T_per, int Nt, Fn&& slice) {
        SpaceTimeField u(std::move(grid), T_per, Nt);
        for (int k = 0; k < Nt; ++k) u.set_slice(k, slice(u.time(k)));
        return u;
    }

    /// e^{itLap} u0 sampled on the window (periodic only if |xi|^2 lies on the tau lattice).
    static SpaceTimeField free_solution(const Field& u0, double T_per, int Nt) {
        return from_function(u0.grid_ptr(), T_per, Nt, [&](double t) { return linear_propagate(u0, t); });
    }

    const WaveguideGrid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    double period() const { return T_per_; }
    int time_samples() const { return Nt_; }
    double time(int k) const { return k * T_per_ / Nt_; }
    double tau(int k) const { return two_pi * WaveguideGrid::signed_index(k, Nt_) / T_per_; }
    std::size_t space_size() const { return grid_->size(); }

    cplx& operator()(int k, std::size_t flat) { return values_[k * space_size() + flat]; }
    cplx operator()(int k, std::size_t flat) const { return values_[k * space_size() + flat]; }
    std::vector<cplx>& values() { return values_; }
    const std::vector<cplx>& values() const { return values_; }

    Field slice(int k) const {
        Field f(grid_, Representation::Physical);
        std::copy_n(values_.begin() + k * space_size(), space_size(), f.values().begin());
        return f;
    }
    void set_slice(int k, const Field& f) {
        require(same_grid(f.grid_ptr(), grid_), "space-time field: slice grid mismatch");
        const Field p = as_physical(f);
        std::copy(p.values().begin(), p.values().end(), values_.begin() + k * space_size());
    }

    /// Space-time L^2 norm by the rectangle rule (exact for trigonometric polynomials).
    double l2_norm() const {
        const double s = pairwise_sum<double>(0, values_.size(), [&](std::size_t i) { return std::norm(values_[i]); });
        return std::sqrt(grid_->cell_volume() * T_per_ / Nt_ * s);
    }

    SpaceTimeField& operator-=(const SpaceTimeField& o) {
        require(same_grid(grid_, o.grid_) && Nt_ == o.Nt_ && T_per_ == o.T_per_, "space-time field: shape mismatch");
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
        return *this;
    }

private:
    GridPtr grid_;
    double T_per_ = 1.0;
    int Nt_ = 0;
    std::vector<cplx> values_;
};

/// Normalized space-time coefficients u~(xi, tau), same layout as the samples
/// (time-frequency storage index major, spatial spectral index minor).
inline std::vector<cplx> space_time_coefficients(const SpaceTimeField& u) {
    const std::size_t S = u.space_size();
    const int Nt = u.time_samples();
    std::vector<cplx> c(u.values());
    const auto dims = u.grid().N();
    for (int k = 0; k < Nt; ++k) fft::forward(dims, c.data() + k * S);
    // e^{+i tau t} in time: FFTW's backward sign.
    std::vector<cplx> series(Nt);
    const double norm = 1.0 / (static_cast<double>(S) * Nt);
    for (std::size_t i = 0; i < S; ++i) {
        for (int k = 0; k < Nt; ++k) series[k] = c[k * S + i];
        fft::backward({Nt}, series.data());
        for (int k = 0; k < Nt; ++k) c[k * S + i] = series[k] * norm;
    }
    return c;
}

inline SpaceTimeField from_space_time_coefficients(const GridPtr& grid, double T_per, int Nt,
                                                   const std::vector<cplx>& coeffs) {
    SpaceTimeField u(grid, T_per, Nt);
    const std::size_t S = grid->size();
    require(coeffs.size() == S * static_cast<std::size_t>(Nt), "space-time coefficients: wrong size");
    auto& c = u.values();
    c = coeffs;
    std::vector<cplx> series(Nt);
    for (std::size_t i = 0; i < S; ++i) {
        for (int k = 0; k < Nt; ++k) series[k] = c[k * S + i];
        fft::forward({Nt}, series.data());
        for (int k = 0; k < Nt; ++k) c[k * S + i] = series[k];
    }
    const auto dims = grid->N();
    for (int k = 0; k < Nt; ++k) fft::backward(dims, c.data() + k * S);
    return u;
}

/// <tau - |xi|^2>^b <xi>^s.
inline double xsb_weight(double xi2, double tau, double s, double b) {
    return std::pow(1.0 + (tau - xi2) * (tau - xi2), 0.5 * b) * std::pow(1.0 + xi2, 0.5 * s);
}

/// ||u||_{X^{s,b}}^2 = vol * T_per * sum <tau - |xi|^2>^{2b} <xi>^{2s} |u~|^2.
inline double xsb_norm_from_coefficients(const WaveguideGrid& g, double T_per, int Nt, const std::vector<cplx>& c,
                                         double s, double b) {
    const std::size_t S = g.size();
    const auto& xi2 = g.frequency_squared();
    const double sum = pairwise_sum<double>(0, c.size(), [&](std::size_t i) {
        const int k = static_cast<int>(i / S);
        const double tau = two_pi * WaveguideGrid::signed_index(k, Nt) / T_per;
        const double w = xsb_weight(xi2[i % S], tau, s, b);
        return w * w * std::norm(c[i]);
    });
    return std::sqrt(g.volume() * T_per * sum);
}

inline double xsb_norm(const SpaceTimeField& u, double s, double b) {
    return xsb_norm_from_coefficients(u.grid(), u.period(), u.time_samples(), space_time_coefficients(u), s, b);
}

struct XsbParams {
    double s = 1.0;
    double b = 0.55;
    double bp = 0.35;  // b'
    double r = 1.0;

    void validate_exponents() const {
        require(bp > 0.0 && bp < 0.5 && b > 0.5 && b + bp <= 1.0,
                "xsb: exponents must satisfy 0 < b' < 1/2 < b and b + b' <= 1");
    }
};

/// Pointwise a * conj(b) * c on the space-time samples.
inline SpaceTimeField trilinear(const SpaceTimeField& a, const SpaceTimeField& b, const SpaceTimeField& c) {
    SpaceTimeField out = a;
    for (std::size_t i = 0; i < out.values().size(); ++i)
        out.values()[i] = a.values()[i] * std::conj(b.values()[i]) * c.values()[i];
    return out;
}

/// Random space-time trigonometric polynomial with coefficients supported on
/// |signed index| <= band in every spatial direction and in time.
inline SpaceTimeField random_band_limited(const GridPtr& grid, double T_per, int Nt, int band, std::mt19937_64& rng) {
    const auto& g = *grid;
    std::normal_distribution<double> normal;
    std::vector<cplx> c(g.size() * static_cast<std::size_t>(Nt), 0.0);
    for (int k = 0; k < Nt; ++k) {
        if (std::abs(WaveguideGrid::signed_index(k, Nt)) > band) continue;
        g.for_each_index([&](std::size_t flat, const std::vector<int>& idx) {
            for (int j = 0; j < g.dim(); ++j)
                if (std::abs(WaveguideGrid::signed_index(idx[j], g.N(j))) > band) return;
            c[k * g.size() + flat] = cplx(normal(rng), normal(rng));
        });
    }
    return from_space_time_coefficients(grid, T_per, Nt, c);
}

// ---------------------------------------------------------------------------
// Trilinear estimates

enum class TrilinearEstimate { CubicHighLow, CubicMixed, CubicDifference, ProductWeighted, ProductCompact };

inline const char* to_string(TrilinearEstimate e) {
    switch (e) {
        case TrilinearEstimate::CubicHighLow: return "cubic_r";
        case TrilinearEstimate::CubicMixed: return "cubic_mixed_r";
        case TrilinearEstimate::CubicDifference: return "cubic_difference_s";
        case TrilinearEstimate::ProductWeighted: return "product_a1a2u";
        case TrilinearEstimate::ProductCompact: return "product_a1a1u";
    }
    return "?";
}

inline constexpr TrilinearEstimate all_trilinear_estimates[] = {
    TrilinearEstimate::CubicHighLow, TrilinearEstimate::CubicMixed, TrilinearEstimate::CubicDifference,
    TrilinearEstimate::ProductWeighted, TrilinearEstimate::ProductCompact};

struct TrilinearRow {
    int sample = 0;
    int band = 0;
    TrilinearEstimate estimate = TrilinearEstimate::CubicHighLow;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
};

/// LHS and RHS of one estimate for the given inputs (u, v, w play the roles
/// u, u~ / a1, a2, u of the respective estimate).
inline TrilinearRow trilinear_sides(TrilinearEstimate e, const XsbParams& p, const SpaceTimeField& u,
                                    const SpaceTimeField& v, const SpaceTimeField& w) {
    TrilinearRow row;
    row.estimate = e;
    const double bp = p.bp;
    const double s3 = std::clamp(p.s, -1.0, 1.0);
    const double r3 = std::min(p.r, 1.0);
    switch (e) {
        case TrilinearEstimate::CubicHighLow:
            row.lhs = xsb_norm(trilinear(u, u, u), p.r, -bp);
            row.rhs = std::pow(xsb_norm(u, p.s, bp), 2) * xsb_norm(u, p.r, bp);
            break;
        case TrilinearEstimate::CubicMixed:
            row.lhs = xsb_norm(trilinear(u, u, v), p.r, -bp);
            row.rhs = xsb_norm(u, p.s, bp) * xsb_norm(u, p.r, bp) * xsb_norm(v, p.r, bp);
            break;
        case TrilinearEstimate::CubicDifference: {
            SpaceTimeField d = trilinear(u, u, u);
            d -= trilinear(v, v, v);
            SpaceTimeField diff = u;
            diff -= v;
            row.lhs = xsb_norm(d, p.s, -bp);
            row.rhs = (std::pow(xsb_norm(u, p.s, bp), 2) + std::pow(xsb_norm(v, p.s, bp), 2)) *
                      xsb_norm(diff, p.s, bp);
            break;
        }
        case TrilinearEstimate::ProductWeighted:
            row.lhs = xsb_norm(trilinear(u, v, w), s3, -bp);
            row.rhs = xsb_norm(u, 1.0, bp) * xsb_norm(v, 1.0, bp) * xsb_norm(w, s3, bp);
            break;
        case TrilinearEstimate::ProductCompact:
            row.lhs = xsb_norm(trilinear(u, u, w), s3, -bp);
            row.rhs = xsb_norm(u, 1.0, bp) * xsb_norm(u, r3, bp) * xsb_norm(w, s3, bp);
            break;
    }
    row.ratio = row.rhs > 0.0 ? row.lhs / row.rhs : 0.0;
    return row;
}

struct TrilinearSummary {
    TrilinearEstimate estimate;
    int band = 0;
    double max_ratio = 0.0;
    double median_ratio = 0.0;
    int degenerate = 0;  // samples with RHS = 0, skipped
};

struct TrilinearReport {
    std::vector<TrilinearRow> rows;
    std::vector<TrilinearSummary> summaries;
};

struct TrilinearOptions {
    int samples = 20;
    std::vector<int> bands = {2, 4};
    unsigned long seed = 11;
    double T_per = two_pi;
    int Nt = 16;
    unsigned threads = 0;
};

/// Largest band for which cubic products of band-limited samples are alias-free.
inline int max_alias_free_band(const WaveguideGrid& g, int Nt) {
    int n = Nt;
    for (int j = 0; j < g.dim(); ++j) n = std::min(n, g.N(j));
    return (n / 2 - 1) / 3;
}

/// Ratios LHS/RHS of the five trilinear estimates over random band-limited
/// samples, for each band limit.
inline TrilinearReport trilinear_ratio(const GridPtr& grid, const XsbParams& p, const TrilinearOptions& opt = {}) {
    TrilinearReport rep;
    const int cap = max_alias_free_band(*grid, opt.Nt);
    for (int band : opt.bands)
        if (band > cap)
            throw ContractError("trilinear_ratio: band " + std::to_string(band) +
                                " aliases cubic products on this grid (max " + std::to_string(cap) + ")");
    for (int band : opt.bands) {
        // Inputs drawn sequentially so the sample set does not depend on threads.
        std::mt19937_64 rng(opt.seed + 1000003ul * band);
        std::vector<std::array<SpaceTimeField, 3>> inputs;
        for (int i = 0; i < opt.samples; ++i) {
            std::array<SpaceTimeField, 3> in;
            for (auto& f : in) f = random_band_limited(grid, opt.T_per, opt.Nt, band, rng);
            inputs.push_back(std::move(in));
        }
        std::vector<std::vector<TrilinearRow>> per(opt.samples);
        parallel_for(opt.samples, opt.threads ? opt.threads : default_threads(), [&](std::size_t i) {
            for (auto e : all_trilinear_estimates) {
                auto row = trilinear_sides(e, p, inputs[i][0], inputs[i][1], inputs[i][2]);
                row.sample = static_cast<int>(i);
                row.band = band;
                per[i].push_back(row);
            }
        });
        for (auto e : all_trilinear_estimates) {
            TrilinearSummary sum{e, band};
            std::vector<double> ratios;
            for (const auto& rows : per)
                for (const auto& r : rows) {
                    if (r.estimate != e) continue;
                    if (r.rhs == 0.0) {
                        ++sum.degenerate;
                        continue;
                    }
                    ratios.push_back(r.ratio);
                }
            if (!ratios.empty()) {
                std::sort(ratios.begin(), ratios.end());
                sum.max_ratio = ratios.back();
                const std::size_t n = ratios.size();
                sum.median_ratio = n % 2 ? ratios[n / 2] : 0.5 * (ratios[n / 2 - 1] + ratios[n / 2]);
            }
            rep.summaries.push_back(sum);
        }
        for (auto& rows : per)
            for (auto& r : rows) rep.rows.push_back(r);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Time-only Sobolev norms on a periodic window

/// Samples of a function of t on [-P/2, P/2), Nt points, treated P-periodically.
struct TimeSignal {
    double P = 16.0;
    std::vector<cplx> values;

    int size() const { return static_cast<int>(values.size()); }
    double time(int k) const { return -0.5 * P + k * P / size(); }

    template <class Fn>
    static TimeSignal sample(double P, int Nt, Fn&& fn) {
        require(P > 0.0 && Nt >= 8 && Nt % 2 == 0, "time signal: need P > 0 and even Nt >= 8");
        TimeSignal s{P, std::vector<cplx>(Nt)};
        for (int k = 0; k < Nt; ++k) s.values[k] = fn(s.time(k));
        return s;
    }

    /// Coefficients c_j with f(t) = sum_j c_j e^{-i tau_j t}, tau_j = 2 pi j / P.
    std::vector<cplx> coefficients() const {
        const int n = size();
        std::vector<cplx> c(n);
        for (int k = 0; k < n; ++k) c[k] = values[k];
        // c_j = (1/n) sum_k f(t_k) e^{i tau_j t_k}, t_k = -P/2 + k P/n.
        fft::backward({n}, c.data());
        for (int j = 0; j < n; ++j) c[j] *= std::polar(1.0 / n, tau(j) * (-0.5 * P));
        return c;
    }

    double tau(int j) const { return two_pi * WaveguideGrid::signed_index(j, size()) / P; }

    /// ||f||_{H^b}^2 = P sum <tau>^{2b} |c|^2.
    double sobolev(double b) const {
        const auto c = coefficients();
        const double sum = pairwise_sum<double>(0, c.size(), [&](std::size_t j) {
            const double t = tau(static_cast<int>(j));
            return std::pow(1.0 + t * t, b) * std::norm(c[j]);
        });
        return std::sqrt(P * sum);
    }
};

/// Psi(x) = 1 on [-1, 1], 0 outside (-2, 2), smooth in between.
inline double gain_bump(double x) { return smooth_ramp(2.0 - std::abs(x)); }

struct GainRow {
    double T = 0.0;
    double ratio = 0.0;       // max over probes of ||F||_{H^b} / ||f||_{H^{-b'}}
    double normalized = 0.0;  // ratio / T^{1-b-b'}
};

struct GainReport {
    std::vector<GainRow> rows;
    double slope = 0.0;       // fitted d log(ratio) / d log(T)
    double expected = 0.0;    // 1 - b - b'
    double max_normalized = 0.0;
};

struct GainOptions {
    double P = 16.0;
    int Nt = 1 << 14;
    std::vector<double> horizons = {1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125};
};

/// F(t) = Psi(t / T) int_0^t f, with the antiderivative taken mode by mode
/// (exact for the sampled trigonometric polynomial).
inline TimeSignal gain_integrate(const TimeSignal& f, double T) {
    const auto c = f.coefficients();
    const int n = f.size();
    // G(t) = c_0 t + sum_{j != 0} c_j (e^{-i tau t} - 1) / (-i tau)
    std::vector<cplx> d(n);
    cplx constant = 0.0;
    for (int j = 1; j < n; ++j) {
        const cplx a = c[j] / cplx(0.0, -f.tau(j));
        d[j] = a;
        constant -= a;
    }
    // Evaluate sum_j d_j e^{-i tau_j t_k} on the window samples.
    std::vector<cplx> e(n);
    for (int j = 0; j < n; ++j) e[j] = d[j] * std::polar(1.0, -f.tau(j) * (-0.5 * f.P));
    fft::forward({n}, e.data());
    TimeSignal F = f;
    for (int k = 0; k < n; ++k) {
        const double t = f.time(k);
        F.values[k] = gain_bump(t / T) * (c[0] * t + constant + e[k]);
    }
    return F;
}

/// Scaling of ||Psi(t/T) int_0^t f||_{H^b} / ||f||_{H^{-b'}} over a dyadic T
/// sweep, with oscillatory probes f(t) = e^{-i w t} e^{-t^2/2}, w in {0, 1/(2T), 1/T}.
inline GainReport gain_integration_scaling(const XsbParams& p, const GainOptions& opt = {}) {
    p.validate_exponents();
    GainReport rep;
    rep.expected = 1.0 - p.b - p.bp;
    std::vector<double> lx, ly;
    for (double T : opt.horizons) {
        require(T > 0.0 && T <= 1.0, "gain_integration_scaling: horizons must lie in (0, 1]");
        require(4.0 * T <= 0.5 * opt.P, "gain_integration_scaling: window too short for the bump");
        double worst = 0.0;
        for (double w : {0.0, 0.5 / T, 1.0 / T}) {
            const auto f = TimeSignal::sample(opt.P, opt.Nt, [w](double t) {
                return std::polar(std::exp(-0.5 * t * t), -w * t);
            });
            const auto F = gain_integrate(f, T);
            worst = std::max(worst, F.sobolev(p.b) / f.sobolev(-p.bp));
        }
        const double normalized = worst / std::pow(T, rep.expected);
        rep.rows.push_back({T, worst, normalized});
        rep.max_normalized = std::max(rep.max_normalized, normalized);
        lx.push_back(std::log(T));
        ly.push_back(std::log(worst));
    }
    if (lx.size() >= 2) {
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i], my += ly[i];
        mx /= lx.size();
        my /= ly.size();
        double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) sxy += (lx[i] - mx) * (ly[i] - my), sxx += (lx[i] - mx) * (lx[i] - mx);
        rep.slope = sxy / sxx;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Restriction norms

enum class ExtensionProfile { Periodic, SmoothCutoff };

struct RestrictionEstimate {
    double periodic = 0.0;  // T-periodic repetition of u|[0,T)
    double smooth = 0.0;    // eta(t) u(t), eta = 1 on [0,T], decaying over `width`
    double bound = 0.0;     // min of the two: an upper bound, never the infimum
    ExtensionProfile best = ExtensionProfile::Periodic;
};

/// Upper bounds for ||u||_{X^{s,b}_T} in the periodic-time model with window
/// T_per = repeats * T. `u` must be defined on the whole window (it is only
/// sampled on [0, T) for the periodic profile).
inline RestrictionEstimate restriction_norm_estimate(const std::function<Field(double)>& u, const GridPtr& grid,
                                                     double T, double s, double b, int samples_per_T = 32,
                                                     double width = 0.0, int repeats = 4) {
    require(T > 0.0 && repeats >= 2 && samples_per_T >= 4 && samples_per_T % 2 == 0,
            "restriction_norm_estimate: invalid sampling");
    if (width <= 0.0) width = 0.5 * T;
    require(T + 2.0 * width <= repeats * T, "restriction_norm_estimate: cutoff does not fit in the window");
    const double T_per = repeats * T;
    const int Nt = repeats * samples_per_T;
    std::vector<Field> base;
    for (int k = 0; k < samples_per_T; ++k) base.push_back(as_physical(u(k * T / samples_per_T)));
    SpaceTimeField periodic(grid, T_per, Nt);
    for (int k = 0; k < Nt; ++k) periodic.set_slice(k, base[k % samples_per_T]);
    SpaceTimeField cut(grid, T_per, Nt);
    for (int k = 0; k < Nt; ++k) {
        double t = cut.time(k);
        if (t >= T + width) t -= T_per;  // window covers [T + width - T_per, T + width)
        double eta = 1.0;
        if (t < 0.0) eta = smooth_ramp(1.0 + t / width);
        else if (t > T) eta = smooth_ramp(1.0 - (t - T) / width);
        Field f = eta > 0.0 ? as_physical(u(t)) : Field::zeros(grid);
        f *= eta;
        cut.set_slice(k, f);
    }
    RestrictionEstimate est;
    est.periodic = xsb_norm(periodic, s, b);
    est.smooth = xsb_norm(cut, s, b);
    est.best = est.smooth < est.periodic ? ExtensionProfile::SmoothCutoff : ExtensionProfile::Periodic;
    est.bound = std::min(est.periodic, est.smooth);
    return est;
}

/// log ||u||_{theta} - [(1-theta) log ||u||_0 + theta log ||u||_1] (<= 0 by Hoelder).
inline double interpolation_gap(const SpaceTimeField& u, double s0, double b0, double s1, double b1, double theta) {
    const auto c = space_time_coefficients(u);
    const auto& g = u.grid();
    auto nrm = [&](double s, double b) { return xsb_norm_from_coefficients(g, u.period(), u.time_samples(), c, s, b); };
    const double mid = nrm((1 - theta) * s0 + theta * s1, (1 - theta) * b0 + theta * b1);
    return std::log(mid) - ((1 - theta) * std::log(nrm(s0, b0)) + theta * std::log(nrm(s1, b1)));
}

}  // namespace wgc
