#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "wgc/errors.hpp"
#include "wgc/numeric.hpp"

namespace wgc {

/// Discrete geometry of a 2*pi*L supercell in the m Euclidean directions times
/// the unit torus in the n periodic directions.
///
/// Points are stored row-major (last direction fastest). Direction j has N[j]
/// points with spacing extent(j) / N[j]. The frequency lattice is (1/L)Z in
/// Euclidean directions and Z in periodic directions, truncated to the signed
/// integer range [-N/2, N/2); the Nyquist index N/2 is read as -N/2.
class WaveguideGrid {
public:
    WaveguideGrid(int m, int n, int L, std::vector<int> N)
        : m_(m), n_(n), L_(L), N_(std::move(N)) {
        require(m_ >= 1, "grid: m must be >= 1");
        require(n_ >= 1, "grid: n must be >= 1");
        require(L_ >= 1, "grid: L must be >= 1");
        require(static_cast<int>(N_.size()) == m_ + n_,
                "grid: N must have m+n entries");
        for (int j = 0; j < dim(); ++j) {
            require(N_[j] >= 4 && N_[j] % 2 == 0,
                    "grid: every N entry must be even and >= 4 (direction " +
                        std::to_string(j) + ")");
        }
        size_ = 1;
        for (int v : N_) size_ *= static_cast<std::size_t>(v);
        strides_.assign(dim(), 1);
        for (int j = dim() - 2; j >= 0; --j)
            strides_[j] = strides_[j + 1] * static_cast<std::size_t>(N_[j + 1]);
        freq_.resize(dim());
        for (int j = 0; j < dim(); ++j) {
            freq_[j].resize(N_[j]);
            const double scale = is_euclidean(j) ? 1.0 / L_ : 1.0;
            for (int i = 0; i < N_[j]; ++i)
                freq_[j][i] = scale * static_cast<double>(signed_index(i, N_[j]));
        }
        xi2_.assign(size_, 0.0);
        for_each_index([&](std::size_t flat, const std::vector<int>& idx) {
            double s = 0.0;
            for (int j = 0; j < dim(); ++j) s += freq_[j][idx[j]] * freq_[j][idx[j]];
            xi2_[flat] = s;
        });
    }

    static std::shared_ptr<const WaveguideGrid> make(int m, int n, int L,
                                                     std::vector<int> N) {
        return std::make_shared<const WaveguideGrid>(m, n, L, std::move(N));
    }

    int m() const { return m_; }
    int n() const { return n_; }
    int L() const { return L_; }
    int dim() const { return m_ + n_; }
    const std::vector<int>& N() const { return N_; }
    int N(int j) const { return N_[j]; }
    std::size_t size() const { return size_; }
    std::size_t stride(int j) const { return strides_[j]; }

    bool is_euclidean(int j) const { return j < m_; }
    double extent(int j) const { return is_euclidean(j) ? two_pi * L_ : two_pi; }
    double spacing(int j) const { return extent(j) / N_[j]; }
    double coord(int j, int i) const { return spacing(j) * i; }

    /// Total volume (2*pi*L)^m (2*pi)^n.
    double volume() const {
        return std::pow(two_pi * L_, m_) * std::pow(two_pi, n_);
    }
    /// Quadrature weight of one grid point.
    double cell_volume() const { return volume() / static_cast<double>(size_); }

    /// Signed integer frequency index for storage index i in [0, n).
    static int signed_index(int i, int n) { return i < n / 2 ? i : i - n; }
    /// Storage index for a signed frequency index (taken modulo n).
    static int storage_index(int k, int n) { return ((k % n) + n) % n; }

    /// Frequency value of storage index i along direction j.
    double frequency(int j, int i) const { return freq_[j][i]; }
    const std::vector<double>& frequencies(int j) const { return freq_[j]; }

    /// Multi-index of flat position `flat`.
    std::vector<int> unflatten(std::size_t flat) const {
        std::vector<int> idx(dim());
        for (int j = 0; j < dim(); ++j) {
            idx[j] = static_cast<int>(flat / strides_[j]);
            flat %= strides_[j];
        }
        return idx;
    }
    std::size_t flatten(const std::vector<int>& idx) const {
        std::size_t flat = 0;
        for (int j = 0; j < dim(); ++j)
            flat += strides_[j] * static_cast<std::size_t>(idx[j]);
        return flat;
    }

    /// |xi|^2 for every lattice point, in storage order.
    const std::vector<double>& frequency_squared() const { return xi2_; }

    /// Calls fn(flat, multi_index) for every point in storage order.
    template <class Fn>
    void for_each_index(Fn&& fn) const {
        std::vector<int> idx(dim(), 0);
        for (std::size_t flat = 0; flat < size_; ++flat) {
            fn(flat, static_cast<const std::vector<int>&>(idx));
            for (int j = dim() - 1; j >= 0; --j) {
                if (++idx[j] < N_[j]) break;
                idx[j] = 0;
            }
        }
    }

    /// Grid of a single unit-torus fiber: same spacing, Euclidean point
    /// counts divided by L, L = 1.
    std::shared_ptr<const WaveguideGrid> fiber_grid() const {
        std::vector<int> Nf = N_;
        for (int j = 0; j < m_; ++j) {
            require(N_[j] % L_ == 0,
                    "floquet: Euclidean point count must be divisible by L");
            Nf[j] = N_[j] / L_;
        }
        return make(m_, n_, 1, Nf);
    }

    bool operator==(const WaveguideGrid& o) const {
        return m_ == o.m_ && n_ == o.n_ && L_ == o.L_ && N_ == o.N_;
    }

    std::string describe() const {
        std::string s = "m=" + std::to_string(m_) + " n=" + std::to_string(n_) +
                        " L=" + std::to_string(L_) + " N=(";
        for (int j = 0; j < dim(); ++j) s += (j ? "," : "") + std::to_string(N_[j]);
        return s + ")";
    }

private:
    int m_, n_, L_;
    std::vector<int> N_;
    std::size_t size_ = 0;
    std::vector<std::size_t> strides_;
    std::vector<std::vector<double>> freq_;
    std::vector<double> xi2_;
};

using GridPtr = std::shared_ptr<const WaveguideGrid>;

inline bool same_grid(const GridPtr& a, const GridPtr& b) {
    return a == b || (a && b && *a == *b);
}

}  // namespace wgc
