#pragma once

// Independent oracles used across the unit and acceptance tests. Nothing here
// calls the library's transforms; the DFT is written out by hand.

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "wgc/field.hpp"
#include "wgc/grid.hpp"

namespace wgc::oracle {

inline Field random_field(const GridPtr& grid, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    Field f(grid, Representation::Physical);
    for (auto& v : f.values()) v = {normal(rng), normal(rng)};
    return f;
}

/// Random field with signed spectral indices |k_j| <= band (spectral form).
inline Field random_band_field(const GridPtr& grid, int band, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    const auto& g = *grid;
    Field F(grid, Representation::Spectral);
    g.for_each_index([&](std::size_t flat, const std::vector<int>& idx) {
        for (int j = 0; j < g.dim(); ++j)
            if (std::abs(WaveguideGrid::signed_index(idx[j], g.N(j))) > band) return;
        F[flat] = {normal(rng), normal(rng)};
    });
    return F;
}

/// O(size^2) normalized DFT: F(k) = (1/size) sum_z f(z) e^{-i xi(k).z}.
inline std::vector<cplx> naive_dft(const Field& f) {
    const auto& g = f.grid();
    std::vector<cplx> out(g.size());
    std::vector<std::vector<int>> idx(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) idx[i] = g.unflatten(i);
    for (std::size_t k = 0; k < g.size(); ++k) {
        cplx acc = 0.0;
        for (std::size_t z = 0; z < g.size(); ++z) {
            double phase = 0.0;
            for (int j = 0; j < g.dim(); ++j) phase += g.frequency(j, idx[k][j]) * g.coord(j, idx[z][j]);
            acc += f[z] * std::polar(1.0, -phase);
        }
        out[k] = acc / static_cast<double>(g.size());
    }
    return out;
}

/// Axis-by-axis direct sums. sign = -1: F(k) = (1/size) sum_z f(z) e^{-i xi(k).z}
/// (same normalization as naive_dft); sign = +1: f(z) = sum_k F(k) e^{i xi(k).z}.
inline std::vector<cplx> separable_dft(const GridPtr& grid, std::vector<cplx> data, int sign) {
    const auto& g = *grid;
    std::vector<cplx> line;
    for (int j = 0; j < g.dim(); ++j) {
        const int n = g.N(j);
        std::vector<cplx> kernel(static_cast<std::size_t>(n) * n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                // forward: a = k, b = z; backward: a = z, b = k
                const double phase = sign < 0 ? -g.frequency(j, a) * g.coord(j, b) : g.frequency(j, b) * g.coord(j, a);
                kernel[a * n + b] = std::polar(sign < 0 ? 1.0 / n : 1.0, phase);
            }
        const std::size_t stride = g.stride(j);
        line.resize(n);
        for (std::size_t base = 0; base < g.size(); ++base) {
            if ((base / stride) % n != 0) continue;
            for (int a = 0; a < n; ++a) {
                cplx acc = 0.0;
                for (int b = 0; b < n; ++b) acc += kernel[a * n + b] * data[base + b * stride];
                line[a] = acc;
            }
            for (int a = 0; a < n; ++a) data[base + a * stride] = line[a];
        }
    }
    return data;
}

/// Fourier coefficients of f, whatever its representation.
inline std::vector<cplx> coefficients(const Field& f) {
    if (f.is_spectral()) return f.values();
    return separable_dft(f.grid_ptr(), f.values(), -1);
}

inline Field synthesize(const GridPtr& grid, const std::vector<cplx>& c) {
    Field out(grid, Representation::Physical);
    out.values() = separable_dft(grid, c, +1);
    return out;
}

inline double xi_squared(const WaveguideGrid& g, std::size_t flat) {
    const auto idx = g.unflatten(flat);
    double s = 0.0;
    for (int j = 0; j < g.dim(); ++j) s += std::pow(g.frequency(j, idx[j]), 2);
    return s;
}

/// ||f||_{H^s} from directly summed coefficients.
inline double hs_norm(const Field& f, double s) {
    const auto c = coefficients(f);
    const auto& g = f.grid();
    double sum = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) sum += std::pow(1.0 + xi_squared(g, i), s) * std::norm(c[i]);
    return std::sqrt(g.volume() * sum);
}

/// Physical array shifted by whole grid steps: out(z) = f(z + shift * h).
inline Field roll(const Field& f, const std::vector<int>& shift) {
    const auto& g = f.grid();
    Field out(f.grid_ptr(), Representation::Physical);
    g.for_each_index([&](std::size_t flat, const std::vector<int>& idx) {
        std::vector<int> src(idx);
        for (int j = 0; j < g.dim(); ++j) src[j] = ((idx[j] + shift[j]) % g.N(j) + g.N(j)) % g.N(j);
        out[flat] = f[g.flatten(src)];
    });
    return out;
}

inline double max_diff(const Field& a, const Field& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double max_abs_values(const Field& a) {
    double m = 0.0;
    for (const auto& v : a.values()) m = std::max(m, std::abs(v));
    return m;
}

inline double rel_diff(const Field& a, const Field& b) {
    return max_diff(a, b) / std::max(max_abs_values(b), 1e-300);
}

/// Plain sum of |values|^2 times the physical cell volume, no pairwise tricks.
inline double plain_l2(const Field& physical) {
    double s = 0.0;
    for (const auto& v : physical.values()) s += std::norm(v);
    return std::sqrt(s * physical.grid().cell_volume());
}

}  // namespace wgc::oracle
