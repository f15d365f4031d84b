#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "wgc/errors.hpp"

namespace wgc::krylov {

// Matrix-free Krylov drivers. `Vec` needs value semantics, operator+=/-=,
// scalar operator*=, and axpy(a, x) (this += a*x); the inner product is
// supplied by the caller and must be conjugate-linear in its first argument.

struct CgOptions {
    double tolerance = 1e-10;  // relative residual ||b - Ax|| / ||b||
    int max_iterations = 500;
};

template <class Vec>
struct CgResult {
    Vec x;
    bool converged = false;
    bool breakdown = false;  // p^H A p <= 0: operator singular or indefinite
    int iterations = 0;
    double relative_residual = 0.0;
    std::vector<double> history;  // relative residual per iteration
};

/// Conjugate gradients for a Hermitian positive definite operator.
template <class Vec, class Apply, class Inner>
CgResult<Vec> conjugate_gradient(const Apply& apply, const Vec& b, Vec x0, const Inner& inner,
                                 const CgOptions& opt = {}) {
    CgResult<Vec> out;
    out.x = std::move(x0);
    const double bnorm = std::sqrt(std::real(inner(b, b)));
    if (bnorm == 0.0) {
        out.x *= 0.0;
        out.converged = true;
        out.history.push_back(0.0);
        return out;
    }
    Vec r = b;
    r -= apply(out.x);
    double rr = std::real(inner(r, r));
    out.relative_residual = std::sqrt(rr) / bnorm;
    out.history.push_back(out.relative_residual);
    if (out.relative_residual <= opt.tolerance) {
        out.converged = true;
        return out;
    }
    Vec p = r;
    for (int it = 1; it <= opt.max_iterations; ++it) {
        Vec Ap = apply(p);
        const double pAp = std::real(inner(p, Ap));
        if (!(pAp > 0.0)) {
            out.breakdown = true;
            out.iterations = it - 1;
            return out;
        }
        const double alpha = rr / pAp;
        out.x.axpy(alpha, p);
        r.axpy(-alpha, Ap);
        const double rr_new = std::real(inner(r, r));
        out.iterations = it;
        out.relative_residual = std::sqrt(rr_new) / bnorm;
        out.history.push_back(out.relative_residual);
        if (out.relative_residual <= opt.tolerance) {
            out.converged = true;
            return out;
        }
        const double beta = rr_new / rr;
        rr = rr_new;
        p *= beta;
        p += r;
    }
    return out;
}

struct LanczosOptions {
    int max_steps = 60;
    double tolerance = 1e-10;  // on the Ritz-value residual estimate |beta_k s_k|
};

template <class Vec>
struct LanczosResult {
    double ritz_value = 0.0;  // largest eigenvalue estimate
    Vec ritz_vector;
    int steps = 0;
    double residual_estimate = 0.0;
    bool converged = false;
};

/// Lanczos with full reorthogonalization for the largest eigenvalue of a
/// Hermitian operator.
template <class Vec, class Apply, class Inner>
LanczosResult<Vec> lanczos_largest(const Apply& apply, Vec start, const Inner& inner,
                                   const LanczosOptions& opt = {}) {
    std::vector<Vec> basis;
    std::vector<double> alpha, beta;
    double nrm = std::sqrt(std::real(inner(start, start)));
    require(nrm > 0.0, "lanczos: zero start vector");
    start *= 1.0 / nrm;
    basis.push_back(std::move(start));
    LanczosResult<Vec> out;
    out.ritz_vector = basis.front();
    for (int k = 0; k < opt.max_steps; ++k) {
        Vec w = apply(basis[k]);
        const double a = std::real(inner(basis[k], w));
        alpha.push_back(a);
        // Two passes of classical Gram-Schmidt against the whole basis.
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& q : basis) w.axpy(-inner(q, w), q);
        const double b = std::sqrt(std::real(inner(w, w)));

        const int dim = k + 1;
        Eigen::MatrixXd Tm = Eigen::MatrixXd::Zero(dim, dim);
        for (int i = 0; i < dim; ++i) {
            Tm(i, i) = alpha[i];
            if (i + 1 < dim) Tm(i, i + 1) = Tm(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Tm);
        const double theta = es.eigenvalues()(dim - 1);
        const Eigen::VectorXd s = es.eigenvectors().col(dim - 1);
        out.ritz_value = theta;
        out.steps = dim;
        out.residual_estimate = std::abs(b * s(dim - 1));
        const bool done = out.residual_estimate <= opt.tolerance * std::abs(theta) || b == 0.0 ||
                          k + 1 == opt.max_steps;
        if (done) {
            Vec y = basis[0];
            y *= s(0);
            for (int i = 1; i < dim; ++i) y.axpy(s(i), basis[i]);
            out.ritz_vector = std::move(y);
            out.converged = out.residual_estimate <= opt.tolerance * std::abs(theta) || b == 0.0;
            return out;
        }
        beta.push_back(b);
        w *= 1.0 / b;
        basis.push_back(std::move(w));
    }
    return out;
}

struct LobpcgOptions {
    double tolerance = 0.0;  // absolute bound on ||A x - lambda x|| (unit x)
    int max_iterations = 500;
    int refresh = 20;        // recompute A x from scratch every this many steps
};

template <class Vec>
struct LobpcgResult {
    double value = 0.0;  // smallest eigenvalue estimate
    Vec vector;          // unit Ritz vector
    int iterations = 0;
    int applications = 0;
    double residual = 0.0;
    bool converged = false;
    std::vector<double> history;
};

/// Locally optimal block preconditioned conjugate gradient, block size one,
/// for the smallest eigenpair of a Hermitian operator. `precond` should
/// approximate the inverse. Rayleigh-Ritz runs on an orthonormalized basis
/// {x, M r, p}; A p is carried by recurrence and A x refreshed periodically.
template <class Vec, class Apply, class Precond, class Inner>
LobpcgResult<Vec> lobpcg_smallest(const Apply& apply, const Precond& precond, Vec x, const Inner& inner,
                                  const LobpcgOptions& opt = {}) {
    auto norm = [&](const Vec& v) { return std::sqrt(std::real(inner(v, v))); };
    LobpcgResult<Vec> out;
    const double n0 = norm(x);
    require(n0 > 0.0, "lobpcg: zero start vector");
    x *= 1.0 / n0;
    Vec Ax = apply(x);
    ++out.applications;
    double lambda = std::real(inner(x, Ax));
    Vec p, Ap;
    bool have_p = false;
    for (int it = 0;; ++it) {
        if (it > 0 && it % opt.refresh == 0) {
            Ax = apply(x);
            ++out.applications;
            lambda = std::real(inner(x, Ax));
        }
        Vec r = Ax;
        r.axpy(-lambda, x);
        out.residual = norm(r);
        out.history.push_back(out.residual);
        out.iterations = it;
        if (out.residual <= opt.tolerance) {
            out.converged = true;
            break;
        }
        if (it == opt.max_iterations) break;

        std::vector<Vec> V = {x};
        std::vector<Vec> AV = {Ax};
        auto add = [&](Vec v, Vec Av) {
            const double before = norm(v);
            for (int pass = 0; pass < 2; ++pass) {
                for (std::size_t i = 0; i < V.size(); ++i) {
                    const cplx c = inner(V[i], v);
                    v.axpy(-c, V[i]);
                    Av.axpy(-c, AV[i]);
                }
            }
            const double after = norm(v);
            if (!(after > 1e-10 * before)) return;
            v *= 1.0 / after;
            Av *= 1.0 / after;
            V.push_back(std::move(v));
            AV.push_back(std::move(Av));
        };
        Vec w = precond(r);
        Vec Aw = apply(w);
        ++out.applications;
        add(std::move(w), std::move(Aw));
        if (have_p) add(p, Ap);

        const int k = static_cast<int>(V.size());
        Eigen::MatrixXcd H(k, k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) H(i, j) = inner(V[i], AV[j]);
        H = 0.5 * (H + H.adjoint()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
        const Eigen::VectorXcd c = es.eigenvectors().col(0);
        lambda = es.eigenvalues()(0);

        Vec xn = V[0];
        xn *= c(0);
        Vec Axn = AV[0];
        Axn *= c(0);
        if (k > 1) {
            p = V[1];
            p *= c(1);
            Ap = AV[1];
            Ap *= c(1);
            for (int i = 2; i < k; ++i) {
                p.axpy(c(i), V[i]);
                Ap.axpy(c(i), AV[i]);
            }
            xn += p;
            Axn += Ap;
            have_p = true;
        }
        const double nx = norm(xn);
        xn *= 1.0 / nx;
        Axn *= 1.0 / nx;
        x = std::move(xn);
        Ax = std::move(Axn);
    }
    // Final residual from a fresh application.
    Ax = apply(x);
    ++out.applications;
    out.value = std::real(inner(x, Ax));
    Vec r = Ax;
    r.axpy(-out.value, x);
    out.residual = norm(r);
    out.converged = out.residual <= opt.tolerance;
    out.vector = std::move(x);
    return out;
}

}  // namespace wgc::krylov
