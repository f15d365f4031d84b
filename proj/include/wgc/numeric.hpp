#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace wgc {

using cplx = std::complex<double>;
inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr cplx imag_unit{0.0, 1.0};

/// Pairwise (cascade) summation of term(i) for i in [begin, end). The
/// association order depends only on the range, so results are reproducible
/// regardless of how callers schedule work.
template <class T, class Term>
T pairwise_sum(std::size_t begin, std::size_t end, const Term& term) {
    constexpr std::size_t leaf = 64;
    if (end - begin <= leaf) {
        T acc{};
        for (std::size_t i = begin; i < end; ++i) acc += term(i);
        return acc;
    }
    const std::size_t mid = begin + (end - begin) / 2;
    return pairwise_sum<T>(begin, mid, term) + pairwise_sum<T>(mid, end, term);
}

/// Smooth C-infinity ramp: 0 for x <= 0, 1 for x >= 1, built from the ratio
/// e^{-1/x} / (e^{-1/x} + e^{-1/(1-x)}).
inline double smooth_ramp(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / x);
    const double b = std::exp(-1.0 / (1.0 - x));
    return a / (a + b);
}

/// Japanese bracket (1 + r2)^{1/2} evaluated from the squared magnitude.
inline double bracket_from_sq(double r2) { return std::sqrt(1.0 + r2); }

/// Runs fn(i) for i in [0, count) on up to `threads` workers (strided
/// assignment); fn must only write to slots owned by index i. The first
/// exception thrown by any worker is rethrown after all workers join.
inline void parallel_for(std::size_t count, unsigned threads,
                         const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(threads, count);
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = w; i < count; i += workers) fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            });
        }
    }
    if (error) std::rethrow_exception(error);
}

/// Process-wide default worker count for parallel regions.
inline unsigned& default_threads() {
    static unsigned threads = 1;
    return threads;
}

}  // namespace wgc
