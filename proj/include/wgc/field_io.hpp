#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "wgc/field.hpp"

namespace wgc::io {

// Binary field dump, little-endian:
//   "WGF1"                      4 bytes
//   m, n, L                     int32 each
//   N[0..m+n)                   int32 each
//   representation              int32 (0 = physical, 1 = spectral)
//   values                      (re, im) float64 pairs, row-major grid order

namespace detail {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian hosts are not supported");

template <class T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
        std::memcpy(&v, b, sizeof(T));
    }
    return v;
}

template <class T>
void put(std::ostream& os, T v) {
    v = to_little(v);
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw ContractError("field dump: truncated input");
    return to_little(v);
}

}  // namespace detail

inline void write_field(std::ostream& os, const Field& f) {
    const auto& g = f.grid();
    os.write("WGF1", 4);
    detail::put<std::int32_t>(os, g.m());
    detail::put<std::int32_t>(os, g.n());
    detail::put<std::int32_t>(os, g.L());
    for (int v : g.N()) detail::put<std::int32_t>(os, v);
    detail::put<std::int32_t>(os, f.is_spectral() ? 1 : 0);
    for (const auto& v : f.values()) {
        detail::put<double>(os, v.real());
        detail::put<double>(os, v.imag());
    }
}

inline Field read_field(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::string(magic, 4) != "WGF1") throw ContractError("field dump: bad magic");
    const int m = detail::get<std::int32_t>(is);
    const int n = detail::get<std::int32_t>(is);
    const int L = detail::get<std::int32_t>(is);
    require(m >= 1 && n >= 1 && m + n <= 16, "field dump: implausible dimensions");
    std::vector<int> N(m + n);
    for (auto& v : N) v = detail::get<std::int32_t>(is);
    const int tag = detail::get<std::int32_t>(is);
    require(tag == 0 || tag == 1, "field dump: bad representation tag");
    auto grid = WaveguideGrid::make(m, n, L, N);
    Field f(grid, tag == 1 ? Representation::Spectral : Representation::Physical);
    for (auto& v : f.values()) {
        const double re = detail::get<double>(is);
        const double im = detail::get<double>(is);
        v = {re, im};
    }
    return f;
}

inline void save_field(const std::string& path, const Field& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ContractError("cannot open " + path + " for writing");
    write_field(os, f);
}

inline Field load_field(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ContractError("cannot open " + path);
    return read_field(is);
}

/// CSV export of a 1D or 2D slice of a physical field. `fixed` gives the grid
/// index for every direction; directions listed in `free_dirs` (one or two)
/// are swept. Columns: coordinates of the free directions, re, im, abs.
inline void write_slice_csv(std::ostream& os, const Field& f, std::vector<int> fixed,
                            const std::vector<int>& free_dirs) {
    const Field u = as_physical(f);
    const auto& g = u.grid();
    require(static_cast<int>(fixed.size()) == g.dim(), "slice: fixed index has wrong length");
    require(free_dirs.size() == 1 || free_dirs.size() == 2, "slice: need one or two free directions");
    for (int d : free_dirs) require(d >= 0 && d < g.dim(), "slice: free direction out of range");
    os << std::setprecision(17);
    for (std::size_t k = 0; k < free_dirs.size(); ++k) os << "z" << free_dirs[k] << ",";
    os << "re,im,abs\n";
    const int n0 = g.N(free_dirs[0]);
    const int n1 = free_dirs.size() == 2 ? g.N(free_dirs[1]) : 1;
    for (int a = 0; a < n0; ++a) {
        for (int b = 0; b < n1; ++b) {
            fixed[free_dirs[0]] = a;
            if (free_dirs.size() == 2) fixed[free_dirs[1]] = b;
            const cplx v = u[g.flatten(fixed)];
            os << g.coord(free_dirs[0], a) << ",";
            if (free_dirs.size() == 2) os << g.coord(free_dirs[1], b) << ",";
            os << v.real() << "," << v.imag() << "," << std::abs(v) << "\n";
        }
    }
}

}  // namespace wgc::io
