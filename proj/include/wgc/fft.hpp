#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <vector>

#include "wgc/numeric.hpp"

namespace wgc::fft {

namespace detail {

struct PlanPair {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
};

// Plans are created once per shape (FFTW_ESTIMATE keeps the chosen algorithm,
// and hence the rounding, identical from run to run) and executed through the
// new-array interface, which is thread-safe.
inline const PlanPair& plans_for(const std::vector<int>& dims) {
    static std::mutex mutex;
    static std::map<std::vector<int>, PlanPair> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(dims);
    if (it != cache.end()) return it->second;
    std::size_t total = 1;
    for (int d : dims) total *= static_cast<std::size_t>(d);
    std::vector<cplx> scratch(total);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    PlanPair p;
    p.forward = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), buf, buf,
                              FFTW_FORWARD, flags);
    p.backward = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), buf, buf,
                               FFTW_BACKWARD, flags);
    return cache.emplace(dims, p).first->second;
}

}  // namespace detail

/// In-place unnormalized forward DFT: X_k = sum_j x_j e^{-2 pi i j k / N}.
inline void forward(const std::vector<int>& dims, cplx* data) {
    auto* buf = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(detail::plans_for(dims).forward, buf, buf);
}

/// In-place unnormalized backward DFT: x_j = sum_k X_k e^{+2 pi i j k / N}.
inline void backward(const std::vector<int>& dims, cplx* data) {
    auto* buf = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(detail::plans_for(dims).backward, buf, buf);
}

inline void forward(const std::vector<int>& dims, std::vector<cplx>& data) { forward(dims, data.data()); }
inline void backward(const std::vector<int>& dims, std::vector<cplx>& data) { backward(dims, data.data()); }

}  // namespace wgc::fft
