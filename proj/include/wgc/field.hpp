#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "wgc/errors.hpp"
#include "wgc/fft.hpp"
#include "wgc/grid.hpp"
#include "wgc/numeric.hpp"

namespace wgc {

enum class Representation { Physical, Spectral };

inline const char* to_string(Representation r) {
    return r == Representation::Physical ? "physical" : "spectral";
}

/// Complex scalar state on a waveguide grid.
///
/// Physical values are samples f(z_j) at grid points. Spectral values are the
/// normalized Fourier coefficients
///     F(xi) = (1/|V|) * integral f(z) e^{-i xi.z} dz  (evaluated by the DFT),
/// so that f(z) = sum_xi F(xi) e^{i xi.z}. With this normalization
///     integral |f|^2 = cell_volume * sum_j |f(z_j)|^2 = |V| * sum_xi |F(xi)|^2.
class Field {
public:
    Field() = default;
    Field(GridPtr grid, Representation rep)
        : grid_(std::move(grid)), rep_(rep), values_(grid_->size()) {}
    Field(GridPtr grid, Representation rep, std::vector<cplx> values)
        : grid_(std::move(grid)), rep_(rep), values_(std::move(values)) {
        require(values_.size() == grid_->size(), "field: value count does not match grid");
    }

    static Field zeros(GridPtr grid, Representation rep = Representation::Physical) {
        return Field(std::move(grid), rep);
    }

    /// Samples fn(z) at every grid point (z has m+n coordinates).
    template <class Fn>
    static Field from_function(GridPtr grid, Fn&& fn) {
        Field f(grid, Representation::Physical);
        std::vector<double> z(grid->dim());
        grid->for_each_index([&](std::size_t flat, const std::vector<int>& idx) {
            for (int j = 0; j < grid->dim(); ++j) z[j] = grid->coord(j, idx[j]);
            f.values_[flat] = fn(static_cast<const std::vector<double>&>(z));
        });
        return f;
    }

    /// Pure lattice mode amp * e^{i xi.z}, xi given by signed integer indices
    /// (xi_j = k_j / L in Euclidean directions). Returned in spectral form.
    static Field mode(GridPtr grid, const std::vector<int>& k, cplx amp = 1.0) {
        require(static_cast<int>(k.size()) == grid->dim(), "field: mode index has wrong length");
        Field f(grid, Representation::Spectral);
        std::vector<int> idx(k.size());
        for (int j = 0; j < grid->dim(); ++j)
            idx[j] = WaveguideGrid::storage_index(k[j], grid->N(j));
        f.values_[grid->flatten(idx)] = amp;
        return f;
    }

    const WaveguideGrid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    Representation representation() const { return rep_; }
    bool is_physical() const { return rep_ == Representation::Physical; }
    bool is_spectral() const { return rep_ == Representation::Spectral; }
    std::size_t size() const { return values_.size(); }

    std::vector<cplx>& values() { return values_; }
    const std::vector<cplx>& values() const { return values_; }
    cplx& operator[](std::size_t i) { return values_[i]; }
    const cplx& operator[](std::size_t i) const { return values_[i]; }

    Field& operator+=(const Field& o) {
        check_compatible(o);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
        return *this;
    }
    Field& operator-=(const Field& o) {
        check_compatible(o);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
        return *this;
    }
    Field& operator*=(cplx a) {
        for (auto& v : values_) v *= a;
        return *this;
    }
    /// this += a * x
    Field& axpy(cplx a, const Field& x) {
        check_compatible(x);
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += a * x.values_[i];
        return *this;
    }

    friend Field operator+(Field a, const Field& b) { return a += b; }
    friend Field operator-(Field a, const Field& b) { return a -= b; }
    friend Field operator*(cplx s, Field a) { return a *= s; }
    friend Field operator*(Field a, cplx s) { return a *= s; }

    void check_compatible(const Field& o) const {
        if (!same_grid(grid_, o.grid_)) throw ContractError("field: grid mismatch");
        if (rep_ != o.rep_) throw ContractError("field: representation mismatch");
    }

private:
    friend Field to_spectral(const Field&);
    friend Field to_physical(const Field&);

    GridPtr grid_;
    Representation rep_ = Representation::Physical;
    std::vector<cplx> values_;
};

inline Field to_spectral(const Field& f) {
    if (!f.is_physical())
        throw ContractError("to_spectral: field is already in spectral representation");
    Field out(f.grid_, Representation::Spectral, f.values_);
    fft::forward(f.grid().N(), out.values_);
    const double inv = 1.0 / static_cast<double>(f.size());
    for (auto& v : out.values_) v *= inv;
    return out;
}

inline Field to_physical(const Field& F) {
    if (!F.is_spectral())
        throw ContractError("to_physical: field is already in physical representation");
    Field out(F.grid_, Representation::Physical, F.values_);
    fft::backward(F.grid().N(), out.values_);
    return out;
}

/// Conversions that accept either representation.
inline Field as_spectral(const Field& f) { return f.is_spectral() ? f : to_spectral(f); }
inline Field as_physical(const Field& f) { return f.is_physical() ? f : to_physical(f); }
inline Field in_representation(const Field& f, Representation rep) {
    return rep == Representation::Spectral ? as_spectral(f) : as_physical(f);
}

/// Precomputed diagonal Fourier multiplier over a grid's frequency lattice.
class Multiplier {
public:
    Multiplier() = default;
    Multiplier(GridPtr grid, std::vector<cplx> table)
        : grid_(std::move(grid)), table_(std::move(table)) {
        require(table_.size() == grid_->size(), "multiplier: table size mismatch");
    }

    /// symbol(xi) evaluated at every lattice frequency. Non-finite values are
    /// rejected with the offending frequency in the message.
    template <class Symbol>
    static Multiplier from_symbol(GridPtr grid, Symbol&& symbol) {
        std::vector<cplx> table(grid->size());
        std::vector<double> xi(grid->dim());
        grid->for_each_index([&](std::size_t flat, const std::vector<int>& idx) {
            for (int j = 0; j < grid->dim(); ++j) xi[j] = grid->frequency(j, idx[j]);
            const cplx v = symbol(std::span<const double>(xi));
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
                std::ostringstream os;
                os << "apply_multiplier: non-finite symbol value at frequency (";
                for (int j = 0; j < grid->dim(); ++j) os << (j ? ", " : "") << xi[j];
                os << ")";
                throw NumericalError(os.str());
            }
            table[flat] = v;
        });
        return Multiplier(std::move(grid), std::move(table));
    }

    /// Symbol depending on |xi|^2 only.
    template <class Radial>
    static Multiplier radial(GridPtr grid, Radial&& fn) {
        const auto& xi2 = grid->frequency_squared();
        std::vector<cplx> table(grid->size());
        for (std::size_t i = 0; i < table.size(); ++i) {
            table[i] = fn(xi2[i]);
            if (!std::isfinite(table[i].real()) || !std::isfinite(table[i].imag()))
                throw NumericalError("apply_multiplier: non-finite symbol value at |xi|^2 = " +
                                     std::to_string(xi2[i]));
        }
        return Multiplier(std::move(grid), std::move(table));
    }

    const WaveguideGrid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    const std::vector<cplx>& table() const { return table_; }

    /// Multiplies spectral coefficients in place.
    void apply_in_place(Field& F) const {
        require(F.is_spectral(), "multiplier: in-place application needs spectral field");
        if (!same_grid(grid_, F.grid_ptr())) throw ContractError("multiplier: grid mismatch");
        auto& v = F.values();
        for (std::size_t i = 0; i < v.size(); ++i) v[i] *= table_[i];
    }

    Multiplier& operator*=(const Multiplier& o) {
        for (std::size_t i = 0; i < table_.size(); ++i) table_[i] *= o.table_[i];
        return *this;
    }

private:
    GridPtr grid_;
    std::vector<cplx> table_;
};

/// Applies a diagonal multiplier; the result has the input's representation.
inline Field apply_multiplier(const Field& f, const Multiplier& mult) {
    Field F = as_spectral(f);
    mult.apply_in_place(F);
    return f.is_spectral() ? F : to_physical(F);
}

template <class Symbol>
    requires std::invocable<Symbol, std::span<const double>>
inline Field apply_multiplier(const Field& f, Symbol&& symbol) {
    return apply_multiplier(f, Multiplier::from_symbol(f.grid_ptr(), symbol));
}

/// Bessel potential (1 - Laplacian)^{sigma/2}, i.e. the multiplier <xi>^sigma.
inline Multiplier bessel_multiplier(const GridPtr& grid, double sigma) {
    return Multiplier::radial(grid, [sigma](double r2) { return cplx(std::pow(1.0 + r2, 0.5 * sigma)); });
}

inline Field bessel_potential(const Field& f, double sigma) {
    if (sigma == 0.0) return f;
    return apply_multiplier(f, bessel_multiplier(f.grid_ptr(), sigma));
}

/// Translation (tau_theta f)(z) = f(z + theta), realized by the spectral phase
/// e^{i theta.xi}; exact for band-limited fields.
inline Field translate(const Field& f, std::span<const double> theta) {
    require(static_cast<int>(theta.size()) == f.grid().dim(), "translate: shift has wrong length");
    const auto& g = f.grid();
    std::vector<std::vector<cplx>> phase(g.dim());
    for (int j = 0; j < g.dim(); ++j) {
        phase[j].resize(g.N(j));
        for (int i = 0; i < g.N(j); ++i)
            phase[j][i] = std::polar(1.0, theta[j] * g.frequency(j, i));
    }
    Field F = as_spectral(f);
    g.for_each_index([&](std::size_t flat, const std::vector<int>& idx) {
        cplx p = 1.0;
        for (int j = 0; j < g.dim(); ++j) p *= phase[j][idx[j]];
        F[flat] *= p;
    });
    return f.is_spectral() ? F : to_physical(F);
}

/// Pointwise product with a real weight given as a physical field.
inline Field pointwise_product(const Field& f, const Field& weight) {
    require(weight.is_physical(), "pointwise_product: weight must be physical");
    Field out = as_physical(f);
    if (!same_grid(out.grid_ptr(), weight.grid_ptr()))
        throw ContractError("pointwise_product: grid mismatch");
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= weight[i];
    return out;
}

/// Sobolev inner product <f, g>_{H^s} = |V| sum <xi>^{2s} conj(F) G
/// (conjugate-linear in the first argument). s = 0 gives the L^2 pairing,
/// which also realizes the H^s x H^{-s} duality pairing.
inline cplx sobolev_inner(const Field& f, const Field& g, double s) {
    if (!same_grid(f.grid_ptr(), g.grid_ptr())) throw ContractError("sobolev_inner: grid mismatch");
    const Field F = as_spectral(f);
    const Field G = as_spectral(g);
    const auto& xi2 = f.grid().frequency_squared();
    const cplx sum = pairwise_sum<cplx>(0, F.size(), [&](std::size_t i) {
        const double w = s == 0.0 ? 1.0 : std::pow(1.0 + xi2[i], s);
        return w * std::conj(F[i]) * G[i];
    });
    return f.grid().volume() * sum;
}

inline double sobolev_norm(const Field& f, double s) {
    const Field F = as_spectral(f);
    const auto& xi2 = f.grid().frequency_squared();
    const double sum = pairwise_sum<double>(0, F.size(), [&](std::size_t i) {
        const double w = s == 0.0 ? 1.0 : std::pow(1.0 + xi2[i], s);
        return w * std::norm(F[i]);
    });
    return std::sqrt(f.grid().volume() * sum);
}

inline cplx duality_pairing(const Field& f, const Field& g) { return sobolev_inner(f, g, 0.0); }

/// L^2 norm from physical-space quadrature (cell_volume * sum |f|^2).
inline double l2_norm_physical(const Field& f) {
    const Field u = as_physical(f);
    const double sum = pairwise_sum<double>(0, u.size(), [&](std::size_t i) { return std::norm(u[i]); });
    return std::sqrt(f.grid().cell_volume() * sum);
}

/// L^2 norm with a nonnegative physical weight: sqrt(integral w |f|^2).
inline double weighted_l2_norm(const Field& f, const Field& weight) {
    const Field u = as_physical(f);
    require(weight.is_physical(), "weighted_l2_norm: weight must be physical");
    const double sum = pairwise_sum<double>(0, u.size(), [&](std::size_t i) {
        return weight[i].real() * std::norm(u[i]);
    });
    return std::sqrt(f.grid().cell_volume() * sum);
}

inline double max_abs(const Field& f) {
    const Field u = as_physical(f);
    double m = 0.0;
    for (const auto& v : u.values()) m = std::max(m, std::abs(v));
    return m;
}

inline bool all_finite(const Field& f) {
    for (const auto& v : f.values())
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
}

/// Pointwise complex conjugate (physical representation).
inline Field conj_field(const Field& f) {
    Field u = as_physical(f);
    for (auto& v : u.values()) v = std::conj(v);
    return u;
}

}  // namespace wgc
