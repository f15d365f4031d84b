#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "wgc/field.hpp"

namespace wgc {

/// Open arc (lo, hi) on the circle R / 2piZ. Length hi - lo >= 2*pi means
/// the whole circle.
struct Interval {
    double lo = 0.0;
    double hi = two_pi;

    double length() const { return hi - lo; }
    bool is_full() const { return length() >= two_pi; }

    /// Offset of x from lo, reduced into [0, 2*pi).
    double offset(double x) const {
        double d = std::fmod(x - lo, two_pi);
        if (d < 0) d += two_pi;
        return d;
    }
    bool contains(double x, double shrink = 0.0) const {
        if (is_full()) return true;
        const double d = offset(x);
        return d > shrink && d < length() - shrink;
    }
    /// Smooth plateau profile: 1 on the arc shrunk by `margin`, 0 outside the arc.
    double profile(double x, double margin) const {
        if (is_full()) return 1.0;
        const double d = offset(x);
        if (d >= length()) return 0.0;
        return smooth_ramp(d / margin) * smooth_ramp((length() - d) / margin);
    }
};

/// Axis-aligned open box: one interval per direction.
using Box = std::vector<Interval>;

/// Control region Omega = Omega1 x Omega2 satisfying the waveguide geometric
/// condition: Omega1 is a union of boxes in the fundamental cell [0, 2*pi)^m,
/// extended 2*pi*Z^m-periodically; Omega2 is a union of boxes in T^n. Omega'
/// is Omega1 with every box shrunk by `margin` per direction.
struct ControlRegion {
    std::vector<Box> boxes1;
    std::vector<Box> boxes2;
    double margin = 0.0;

    static ControlRegion whole(int m, int n) {
        ControlRegion r;
        r.boxes1 = {Box(m, Interval{})};
        r.boxes2 = {Box(n, Interval{})};
        return r;
    }

    bool is_whole() const {
        auto full = [](const std::vector<Box>& boxes) {
            for (const auto& b : boxes) {
                bool all = true;
                for (const auto& iv : b) all = all && iv.is_full();
                if (all) return true;
            }
            return false;
        };
        return full(boxes1) && full(boxes2);
    }

    void validate(int m, int n) const {
        require(!boxes1.empty(), "region: boxes1 must be nonempty");
        require(!boxes2.empty(), "region: boxes2 must be nonempty");
        auto check = [this](const std::vector<Box>& boxes, int d, const char* what) {
            for (const auto& b : boxes) {
                require(static_cast<int>(b.size()) == d,
                        std::string("region: ") + what + " box has wrong dimension");
                for (const auto& iv : b) {
                    require(iv.length() > 0.0, std::string("region: ") + what + " interval is empty");
                    require(iv.is_full() || iv.length() > 2.0 * margin,
                            std::string("region: margin leaves an empty shrunk box in ") + what);
                }
            }
        };
        check(boxes1, m, "boxes1");
        check(boxes2, n, "boxes2");
        require(margin >= 0.0, "region: margin must be nonnegative");
        require(margin > 0.0 || is_whole(), "region: margin must be positive unless the region is the whole domain");
    }

    /// Membership of z (m+n coordinates) in Omega1 x Omega2, or in the shrunk
    /// set Omega' x Omega2' when shrink > 0.
    bool contains(const std::vector<double>& z, int m, double shrink = 0.0) const {
        auto in = [&](const std::vector<Box>& boxes, int offset) {
            for (const auto& b : boxes) {
                bool inside = true;
                for (std::size_t j = 0; j < b.size() && inside; ++j)
                    inside = b[j].contains(z[offset + j], shrink);
                if (inside) return true;
            }
            return false;
        };
        return in(boxes1, 0) && in(boxes2, m);
    }
};

namespace detail {

/// Samples fn(z) with Euclidean coordinates reduced to the fundamental cell by
/// index, so all L^m supercell copies see bit-identical arguments.
template <class Fn>
Field sample_cellwise(const GridPtr& grid, Fn&& fn) {
    const auto& g = *grid;
    Field f(grid, Representation::Physical);
    std::vector<double> z(g.dim());
    g.for_each_index([&](std::size_t flat, const std::vector<int>& idx) {
        for (int j = 0; j < g.dim(); ++j) {
            const int cell = g.is_euclidean(j) && g.N(j) % g.L() == 0 ? g.N(j) / g.L() : g.N(j);
            z[j] = g.coord(j, idx[j] % cell);
        }
        f[flat] = fn(static_cast<const std::vector<double>&>(z));
    });
    return f;
}

inline double union_profile(const std::vector<Box>& boxes, const std::vector<double>& z,
                            int offset, double margin) {
    double miss = 1.0;
    for (const auto& b : boxes) {
        double p = 1.0;
        for (std::size_t j = 0; j < b.size(); ++j) p *= b[j].profile(z[offset + j], margin);
        miss *= 1.0 - p;
    }
    return 1.0 - miss;
}

}  // namespace detail

/// Exact Fourier coefficients of the indicator of Omega1 x Omega2:
///     (1/(2pi)^{m+n}) integral_{cell} 1_Omega(z) e^{-i kappa.z} dz
/// for integer frequency vectors kappa. Overlapping boxes are handled by
/// inclusion-exclusion; each intersection of arcs is a union of disjoint
/// pieces inside [0, 2pi).
class IndicatorCoefficients {
public:
    explicit IndicatorCoefficients(const ControlRegion& region) {
        terms1_ = expand(region.boxes1);
        terms2_ = expand(region.boxes2);
    }

    cplx operator()(const std::vector<double>& kappa, int m) const {
        return evaluate(terms1_, kappa, 0) * evaluate(terms2_, kappa, m);
    }

    /// (1/2pi) integral_a^b e^{-i kappa x} dx.
    static cplx piece(double a, double b, double kappa) {
        if (kappa == 0.0) return (b - a) / two_pi;
        if (b - a >= two_pi && kappa == std::round(kappa)) return 0.0;
        return (std::polar(1.0, -kappa * a) - std::polar(1.0, -kappa * b)) / cplx(0.0, two_pi * kappa);
    }

private:
    using Pieces = std::vector<std::pair<double, double>>;
    struct Term {
        double sign = 1.0;
        std::vector<Pieces> dims;
    };

    static Pieces arc_pieces(const Interval& iv) {
        if (iv.is_full()) return {{0.0, two_pi}};
        double a = std::fmod(iv.lo, two_pi);
        if (a < 0) a += two_pi;
        const double b = a + iv.length();
        if (b <= two_pi) return {{a, b}};
        return {{a, two_pi}, {0.0, b - two_pi}};
    }

    static Pieces intersect(const Pieces& x, const Pieces& y) {
        Pieces out;
        for (const auto& [a, b] : x)
            for (const auto& [c, d] : y)
                if (std::min(b, d) > std::max(a, c)) out.push_back({std::max(a, c), std::min(b, d)});
        return out;
    }

    static std::vector<Term> expand(const std::vector<Box>& boxes) {
        std::vector<Term> terms;
        const std::size_t count = boxes.size();
        require(count < 16, "indicator coefficients: too many boxes");
        for (std::size_t mask = 1; mask < (std::size_t{1} << count); ++mask) {
            Term t;
            int bits = 0;
            for (std::size_t i = 0; i < count; ++i) {
                if (!(mask >> i & 1)) continue;
                ++bits;
                if (t.dims.empty()) {
                    for (const auto& iv : boxes[i]) t.dims.push_back(arc_pieces(iv));
                } else {
                    for (std::size_t j = 0; j < t.dims.size(); ++j)
                        t.dims[j] = intersect(t.dims[j], arc_pieces(boxes[i][j]));
                }
            }
            t.sign = bits % 2 ? 1.0 : -1.0;
            terms.push_back(std::move(t));
        }
        return terms;
    }

    static cplx evaluate(const std::vector<Term>& terms, const std::vector<double>& kappa, int offset) {
        cplx total = 0.0;
        for (const auto& t : terms) {
            cplx prod = t.sign;
            for (std::size_t j = 0; j < t.dims.size() && prod != 0.0; ++j) {
                cplx sum = 0.0;
                for (const auto& [a, b] : t.dims[j]) sum += piece(a, b, kappa[offset + j]);
                prod *= sum;
            }
            total += prod;
        }
        return total;
    }

    std::vector<Term> terms1_, terms2_;
};

/// Smooth spatial cutoff chi_Omega sampled on a grid (physical, real-valued).
struct CutoffChi {
    ControlRegion region;
    Field samples;
    double smoothness = 0.0;  // transition width (the region margin)
    bool sharp = false;       // indicator of Omega rather than a smooth profile

    const GridPtr& grid_ptr() const { return samples.grid_ptr(); }

    /// chi = c everywhere.
    static CutoffChi constant(const GridPtr& grid, double c) {
        CutoffChi chi;
        chi.region = ControlRegion::whole(grid->m(), grid->n());
        chi.samples = Field::from_function(grid, [c](const std::vector<double>&) { return cplx(c); });
        return chi;
    }

    /// Indicator of Omega1 x Omega2 at grid points.
    static CutoffChi sharp_indicator(const ControlRegion& region, const GridPtr& grid) {
        region.validate(grid->m(), grid->n());
        CutoffChi chi;
        chi.region = region;
        chi.sharp = true;
        const int m = grid->m();
        chi.samples = detail::sample_cellwise(grid, [&](const std::vector<double>& z) {
            return cplx(region.contains(z, m) ? 1.0 : 0.0);
        });
        return chi;
    }
};


/// Builds chi_Omega from tensor products of 1D C-infinity plateau profiles;
/// unions of boxes are combined as 1 - prod(1 - p_box). Guarantees
/// 1_{Omega' x Omega2'} <= chi <= 1_{Omega1 x Omega2} at every grid point.
inline CutoffChi build_chi(const ControlRegion& region, const GridPtr& grid) {
    region.validate(grid->m(), grid->n());
    if (region.is_whole()) {
        CutoffChi chi = CutoffChi::constant(grid, 1.0);
        chi.region = region;
        return chi;
    }
    // Each non-full transition must span at least three grid spacings.
    for (int j = 0; j < grid->dim(); ++j) {
        const auto& boxes = grid->is_euclidean(j) ? region.boxes1 : region.boxes2;
        const int local = grid->is_euclidean(j) ? j : j - grid->m();
        bool needs = false;
        for (const auto& b : boxes) needs = needs || !b[local].is_full();
        if (needs && region.margin < 3.0 * grid->spacing(j)) {
            const double per_cell = 3.0 * two_pi / region.margin;
            int min_n = static_cast<int>(std::ceil(per_cell)) * (grid->is_euclidean(j) ? grid->L() : 1);
            if (min_n % 2) ++min_n;
            std::ostringstream os;
            os << "build_chi: margin " << region.margin << " is unresolvable in direction " << j
               << " (spacing " << grid->spacing(j) << "); use N[" << j << "] >= " << min_n;
            throw ContractError(os.str());
        }
    }
    CutoffChi chi;
    chi.region = region;
    chi.smoothness = region.margin;
    const int m = grid->m();
    chi.samples = detail::sample_cellwise(grid, [&](const std::vector<double>& z) {
        return cplx(detail::union_profile(region.boxes1, z, 0, region.margin) *
                    detail::union_profile(region.boxes2, z, m, region.margin));
    });
    return chi;
}

/// Temporal cutoff phi_T(t) = phi_1(t / T), phi_1 = 1 on (-inf, 1/2],
/// 0 on [3/4, inf), monotone smooth transition in between. The `unit` variant
/// is phi == 1 (plain observation without time cutoff).
class TimeCutoff {
public:
    TimeCutoff() = default;
    TimeCutoff(double T, bool unit) : T_(T), unit_(unit) {
        require(T > 0.0, "build_phi: T must be positive");
    }

    static TimeCutoff unit(double T) { return TimeCutoff(T, true); }

    double T() const { return T_; }
    bool is_unit() const { return unit_; }

    static double profile(double s) { return 1.0 - smooth_ramp(4.0 * (s - 0.5)); }

    double operator()(double t) const { return unit_ ? 1.0 : profile(t / T_); }

    std::vector<double> at(const std::vector<double>& nodes) const {
        std::vector<double> out(nodes.size());
        for (std::size_t i = 0; i < nodes.size(); ++i) out[i] = (*this)(nodes[i]);
        return out;
    }

private:
    double T_ = 1.0;
    bool unit_ = false;
};

inline TimeCutoff build_phi(double T) { return TimeCutoff(T, false); }

/// Node values of phi_T on a time grid.
inline std::vector<double> build_phi(double T, const std::vector<double>& nodes) {
    return TimeCutoff(T, false).at(nodes);
}

/// [chi, (1 - Laplacian)^{s/2}] f = chi (1-Lap)^{s/2} f - (1-Lap)^{s/2} (chi f).
/// Returned in physical representation.
inline Field commutator_apply(const CutoffChi& chi, double s, const Field& f) {
    const Field a = pointwise_product(bessel_potential(as_physical(f), s), chi.samples);
    const Field b = as_physical(bessel_potential(pointwise_product(f, chi.samples), s));
    return a - b;
}

}  // namespace wgc
