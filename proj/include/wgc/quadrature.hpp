#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "wgc/errors.hpp"
#include "wgc/numeric.hpp"

namespace wgc {

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton iteration on P_n).
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    require(n >= 1, "gauss_legendre: need at least one node");
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 1; k <= n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 1; k <= n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
}

enum class QuadratureRule { GaussLegendre, Midpoint };

inline const char* to_string(QuadratureRule r) {
    return r == QuadratureRule::GaussLegendre ? "gauss-legendre" : "midpoint";
}

/// Time quadrature on [0, T]. Composite Gauss-Legendre uses `nodes / order`
/// equal panels of `order` points each; the midpoint rule places nodes at
/// (j + 1/2) T / nodes, which coincide with the Strang-step midpoints of a
/// solver using dt = T / nodes.
struct TimeQuadrature {
    QuadratureRule rule = QuadratureRule::GaussLegendre;
    double T = 1.0;
    int order = 8;
    std::vector<double> nodes;
    std::vector<double> weights;

    static TimeQuadrature make(QuadratureRule rule, double T, int count, int order = 8) {
        require(T > 0.0, "quadrature: T must be positive");
        require(count >= 8, "quadrature: need at least 8 nodes");
        TimeQuadrature q;
        q.rule = rule;
        q.T = T;
        q.order = order;
        if (rule == QuadratureRule::Midpoint) {
            q.nodes.resize(count);
            q.weights.assign(count, T / count);
            for (int j = 0; j < count; ++j) q.nodes[j] = (j + 0.5) * T / count;
        } else {
            require(count % order == 0, "quadrature: Gauss-Legendre node count must be a multiple of the panel order");
            const int panels = count / order;
            std::vector<double> x, w;
            gauss_legendre(order, x, w);
            const double h = T / panels;
            for (int p = 0; p < panels; ++p) {
                for (int i = 0; i < order; ++i) {
                    q.nodes.push_back(p * h + 0.5 * h * (x[i] + 1.0));
                    q.weights.push_back(0.5 * h * w[i]);
                }
            }
        }
        return q;
    }

    int size() const { return static_cast<int>(nodes.size()); }

    TimeQuadrature doubled() const { return make(rule, T, 2 * size(), order); }
};

}  // namespace wgc
