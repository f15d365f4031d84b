#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_support.hpp"
#include "wgc/observability.hpp"

using namespace wgc;
using oracle::max_diff;

namespace {

ControlRegion box_region(double lo, double hi, double lo2, double hi2, double margin) {
    ControlRegion r;
    r.boxes1 = {{Interval{lo, hi}}};
    r.boxes2 = {{Interval{lo2, hi2}}};
    r.margin = margin;
    return r;
}

GramianSpec spec_for(const CutoffChi& chi, double T, double s, bool unit_phi, int nodes = 16) {
    return GramianSpec::make(chi, unit_phi ? TimeCutoff::unit(T) : build_phi(T), s,
                             TimeQuadrature::make(QuadratureRule::GaussLegendre, T, nodes));
}

// integral phi^2 || chi e^{itLap} w ||^2_{H^{-s}} on the spec's nodes, written out
// with explicit spectral weights.
double quadratic_form(const GramianSpec& spec, const Field& w) {
    const auto& g = *spec.grid_ptr();
    double total = 0.0;
    for (int j = 0; j < spec.quadrature.size(); ++j) {
        const double t = spec.quadrature.nodes[j];
        const double p = spec.phi(t);
        Field v = as_physical(linear_propagate(w, t));
        for (std::size_t i = 0; i < v.size(); ++i) v[i] *= p * spec.chi.samples[i].real();
        const auto V = oracle::naive_dft(v);
        const auto& xi2 = g.frequency_squared();
        double e = 0.0;
        for (std::size_t i = 0; i < V.size(); ++i) e += std::norm(V[i]) * std::pow(1.0 + xi2[i], -spec.s);
        total += spec.quadrature.weights[j] * e * g.volume();
    }
    return total;
}

double l2sq(const Field& f) { return std::pow(sobolev_norm(f, 0.0), 2); }

}  // namespace

TEST(Gramian, FullObservationIsTimesIdentity) {
    std::mt19937_64 rng(1);
    auto g = WaveguideGrid::make(1, 1, 2, {16, 8});
    const auto spec = spec_for(CutoffChi::constant(g, 1.0), 0.7, 0.0, true);
    const Field w = oracle::random_field(g, rng);
    EXPECT_LE(oracle::rel_diff(gramian_apply(spec, w), 0.7 * w), 1e-12);
}

TEST(Gramian, SmoothingOnPureMode) {
    auto g = WaveguideGrid::make(1, 1, 1, {16, 8});
    const auto spec = spec_for(CutoffChi::constant(g, 1.0), 1.3, 2.0, true);
    const Field u = Field::from_function(g, [](const std::vector<double>& z) { return std::polar(1.0, z[1]); });
    EXPECT_LE(max_diff(gramian_apply(spec, u), (1.3 / 4) * u), 1e-12);
}

TEST(Gramian, QuadraticFormMatchesDirectQuadrature) {
    std::mt19937_64 rng(2);
    auto g = WaveguideGrid::make(1, 1, 1, {32, 8});
    const auto chi = build_chi(box_region(0.0, pi, 0.0, two_pi, 0.6), g);
    for (double s : {0.0, 1.0}) {
        const auto spec = spec_for(chi, 1.0, s, false);
        const Gramian G(spec);
        for (int trial = 0; trial < 3; ++trial) {
            const Field w = oracle::random_field(g, rng);
            const double expect = quadratic_form(spec, w);
            EXPECT_NEAR(std::real(duality_pairing(G.apply(w), w)) / expect, 1.0, 1e-10);
            EXPECT_NEAR(G.observation_energy(w) / expect, 1.0, 1e-10);
        }
    }
}

TEST(Gramian, SymmetricAndPositive) {
    std::mt19937_64 rng(3);
    auto g = WaveguideGrid::make(1, 1, 2, {32, 16});
    const auto chi = build_chi(box_region(0.5, 4.0, 1.0, 5.0, 1.2), g);
    for (double s : {0.0, 1.0}) {
        const Gramian G(spec_for(chi, 0.8, s, false));
        for (int trial = 0; trial < 10; ++trial) {
            const Field u = oracle::random_field(g, rng), v = oracle::random_field(g, rng);
            const cplx a = sobolev_inner(G.apply(u), v, 0.0), b = sobolev_inner(u, G.apply(v), 0.0);
            EXPECT_LE(std::abs(a - b), 1e-10 * sobolev_norm(u, 0.0) * sobolev_norm(v, 0.0));
            EXPECT_GE(std::real(sobolev_inner(G.apply(u), u, 0.0)), -1e-12);
        }
    }
}

TEST(Gramian, GridMismatchAndBadSpec) {
    auto g = WaveguideGrid::make(1, 1, 1, {16, 8});
    const auto spec = spec_for(CutoffChi::constant(g, 1.0), 1.0, 0.0, true);
    EXPECT_THROW(gramian_apply(spec, Field::zeros(WaveguideGrid::make(1, 1, 1, {8, 8}))), ContractError);
    EXPECT_THROW(spec_for(CutoffChi::constant(g, 1.0), 1.0, 0.0, true, 4), ContractError);
    auto bad = spec;
    bad.quadrature.weights[0] *= 2;
    EXPECT_THROW(bad.validate(), ContractError);
}

TEST(Observability, FullObservationConstant) {
    auto g = WaveguideGrid::make(1, 1, 1, {16, 8});
    const auto rep = observability_constant(spec_for(CutoffChi::constant(g, 1.0), 0.5, 0.0, true));
    ASSERT_TRUE(rep.observable) << rep.message;
    EXPECT_NEAR(rep.lambda_min, 0.5, 1e-10);
    EXPECT_NEAR(rep.c_obs, 2.0, 1e-9);
}

TEST(Observability, RayleighQuotientsBoundLambdaMin) {
    auto g = WaveguideGrid::make(1, 1, 1, {32, 32});
    const auto spec = spec_for(build_chi(box_region(0.0, pi, 0.0, pi, 0.6), g), 0.5, 0.0, true);
    const auto rep = observability_constant(spec);
    ASSERT_TRUE(rep.observable) << rep.message;
    EXPECT_LE(rep.residual, 1e-8 * rep.norm_estimate);
    EXPECT_GT(rep.lambda_min, 0.0);
    const Gramian G(spec);
    for (int k = 0; k < 20; ++k) {
        const Field e = Field::mode(g, {k % 7 - 3, k / 7 - 1});
        const double rq = std::real(sobolev_inner(G.apply(e), e, 0.0)) / l2sq(e);
        EXPECT_GE(rq, rep.lambda_min * (1 - 1e-10));
    }
    // The extremal mode realizes lambda_min.
    const Field y = rep.extremal_mode;
    EXPECT_NEAR(std::real(sobolev_inner(G.apply(y), y, 0.0)) / l2sq(y), rep.lambda_min, 1e-8 * rep.norm_estimate);
}

TEST(Observability, EmptyRegionIsReportedNotThrown) {
    auto g = WaveguideGrid::make(1, 1, 1, {16, 8});
    const auto rep = observability_constant(spec_for(CutoffChi::constant(g, 0.0), 1.0, 0.0, true));
    EXPECT_FALSE(rep.observable);
    EXPECT_LT(rep.lambda_min, 1e-12);
    EXPECT_NE(rep.message.find("observability failure"), std::string::npos);
    EXPECT_THROW(observability_constant(spec_for(CutoffChi::constant(g, 1.0), 1.0, 1.0, true)), ContractError);
}

TEST(Observability, LargerRegionObservesMore) {
    auto g = WaveguideGrid::make(1, 1, 1, {32, 32});
    const auto small = build_chi(box_region(0.0, 2.0, 0.0, pi, 0.6), g);
    const auto large = build_chi(box_region(0.0, 3.5, 0.0, pi, 0.6), g);
    for (std::size_t i = 0; i < small.samples.size(); ++i)
        ASSERT_GE(large.samples[i].real(), small.samples[i].real());
    const auto a = observability_constant(spec_for(small, 0.5, 0.0, true));
    const auto b = observability_constant(spec_for(large, 0.5, 0.0, true));
    ASSERT_TRUE(a.observable && b.observable);
    EXPECT_GE(b.lambda_min, a.lambda_min * (1 - 1e-9));
}

TEST(WeakObservability, FullObservation) {
    std::mt19937_64 rng(4);
    auto g = WaveguideGrid::make(1, 1, 1, {16, 8});
    const double T = 0.8;
    std::vector<Field> probes;
    for (int i = 0; i < 5; ++i) probes.push_back(oracle::random_field(g, rng));
    const auto rep = weak_observability_check(spec_for(CutoffChi::constant(g, 1.0), T, 1.0, true), probes);
    EXPECT_TRUE(rep.holds_with(1.0 / T, 0.0));
    EXPECT_TRUE(rep.all_hold);
    EXPECT_LE(rep.c0, 1.0 / T);
    EXPECT_LE(rep.identity_residual, 1e-12);
}

TEST(WeakObservability, FittedConstantsCoverProbes) {
    std::mt19937_64 rng(5);
    auto g = WaveguideGrid::make(1, 1, 1, {32, 32});
    const auto chi = build_chi(box_region(0.0, pi, 0.0, pi, 0.6), g);
    std::vector<Field> probes;
    for (int i = 0; i < 50; ++i) probes.push_back(oracle::random_field(g, rng));
    for (double s : {1.0, 2.0}) {
        const auto rep = weak_observability_check(spec_for(chi, 0.5, s, true, 8), probes);
        ASSERT_EQ(rep.rows.size(), 50u);
        EXPECT_TRUE(rep.all_hold);
        for (const auto& r : rep.rows)
            EXPECT_LE(r.hs_norm_sq, (2 * rep.c0 * r.observed + 2 * rep.c0 * rep.c * r.lower_norm_sq) * (1 + 1e-12));
        EXPECT_LE(rep.identity_residual, 1e-12);
    }
}

TEST(EigenmodeTable, NoUnobservedEigenspaceAndConstantMode) {
    auto g = WaveguideGrid::make(1, 1, 2, {64, 32});
    const auto chi = build_chi(box_region(0.0, pi, 0.0, pi, 0.6), g);
    const auto spec = spec_for(chi, 1.0, 0.0, false);
    const auto rows = eigenmode_observation_table(spec, 30.0);
    ASSERT_FALSE(rows.empty());
    for (const auto& r : rows) EXPECT_GT(r.min_observation, 0.0) << "lambda=" << r.lambda;
    double phi_sq = 0.0, chi_mean = 0.0;
    for (int j = 0; j < spec.quadrature.size(); ++j)
        phi_sq += spec.quadrature.weights[j] * std::pow(spec.phi(spec.quadrature.nodes[j]), 2);
    for (const auto& v : chi.samples.values()) chi_mean += std::norm(v);
    chi_mean /= static_cast<double>(chi.samples.size());
    EXPECT_EQ(rows.front().lambda, 0.0);
    EXPECT_NEAR(rows.front().min_observation, phi_sq * chi_mean, 1e-12);
}

TEST(QuadratureConvergence, StopsOnceEnergiesSettle) {
    std::mt19937_64 rng(6);
    auto g = WaveguideGrid::make(1, 1, 1, {32, 8});
    const auto chi = build_chi(box_region(0.0, pi, 0.0, two_pi, 0.8), g);
    const std::vector<Field> probes = {oracle::random_field(g, rng), oracle::random_field(g, rng)};
    const auto res = converge_quadrature(spec_for(chi, 1.0, 0.0, false, 8), probes, 1e-10, 1024);
    EXPECT_TRUE(res.converged);
    EXPECT_LE(res.max_changes.back(), 1e-10);
    EXPECT_EQ(res.node_counts.back(), res.spec.quadrature.size());
}

namespace {

// integral over a box of |u|^2 for a band-limited u, by tensor Gauss-Legendre
// panels evaluating the Fourier series pointwise.
double box_integral(const Field& U, double ax, double bx, double ay, double by) {
    const auto& g = U.grid();
    std::vector<double> x, w;
    gauss_legendre(12, x, w);
    const int panels = 12;
    std::vector<std::pair<double, double>> px, py;
    for (int p = 0; p < panels; ++p) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double hx = (bx - ax) / panels, hy = (by - ay) / panels;
            px.push_back({ax + hx * (p + 0.5 + 0.5 * x[i]), 0.5 * hx * w[i]});
            py.push_back({ay + hy * (p + 0.5 + 0.5 * x[i]), 0.5 * hy * w[i]});
        }
    }
    double total = 0.0;
    for (const auto& [zx, wx] : px) {
        for (const auto& [zy, wy] : py) {
            cplx v = 0.0;
            for (std::size_t i = 0; i < U.size(); ++i) {
                if (U[i] == 0.0) continue;
                const auto idx = g.unflatten(i);
                v += U[i] * std::polar(1.0, g.frequency(0, idx[0]) * zx + g.frequency(1, idx[1]) * zy);
            }
            total += wx * wy * std::norm(v);
        }
    }
    return total;
}

}  // namespace

TEST(SharpObservation, MatchesRegionIntegral) {
    std::mt19937_64 rng(7);
    auto g = WaveguideGrid::make(1, 1, 2, {16, 8});
    const auto region = box_region(0.5, 2.5, 1.0, 4.0, 0.3);
    const auto spec = GramianSpec::make(CutoffChi::sharp_indicator(region, g), TimeCutoff::unit(0.4), 0.0,
                                        TimeQuadrature::make(QuadratureRule::GaussLegendre, 0.4, 8));
    const ObservationForm form(spec, Observation::Sharp);
    const Field w = oracle::random_band_field(g, 3, rng);
    double expect = 0.0;
    for (int j = 0; j < 8; ++j) {
        const Field v = linear_propagate(w, spec.quadrature.nodes[j]);
        // Two supercell copies of the box in x.
        expect += spec.quadrature.weights[j] * (box_integral(v, 0.5, 2.5, 1.0, 4.0) +
                                                box_integral(v, 0.5 + two_pi, 2.5 + two_pi, 1.0, 4.0));
    }
    EXPECT_NEAR(std::real(duality_pairing(form.apply(w), w)) / expect, 1.0, 1e-10);
}

TEST(SharpObservation, IndicatorCoefficientsUnionAndWrap) {
    ControlRegion a = box_region(0.0, 2.0, 0.0, two_pi, 0.1);
    a.boxes1.push_back({Interval{1.0, 3.0}});
    const IndicatorCoefficients ca(a), cb(box_region(0.0, 3.0, 0.0, two_pi, 0.1));
    const IndicatorCoefficients wrap(box_region(5.0, 7.0, 0.0, two_pi, 0.1));
    for (double k : {0.0, 1.0, -2.0, 5.0}) {
        const std::vector<double> kappa = {k, 0.0};
        EXPECT_NEAR(std::abs(ca(kappa, 1) - cb(kappa, 1)), 0.0, 1e-15);
        // (5, 7) is (5, 2pi) together with (0, 7 - 2pi).
        const cplx expect = IndicatorCoefficients::piece(5.0, two_pi, k) + IndicatorCoefficients::piece(0.0, 7.0 - two_pi, k);
        EXPECT_NEAR(std::abs(wrap(kappa, 1) - expect), 0.0, 1e-15);
    }
    EXPECT_NEAR(std::real(cb({0.0, 0.0}, 1)), 3.0 / two_pi, 1e-15);
    EXPECT_EQ(cb({0.0, 1.0}, 1), cplx(0.0));
}

TEST(SharpObservation, WholeRegionIsTimesIdentity) {
    std::mt19937_64 rng(8);
    auto g = WaveguideGrid::make(1, 1, 2, {16, 8});
    const auto spec = spec_for(CutoffChi::constant(g, 1.0), 0.6, 0.0, true);
    const Field w = to_spectral(oracle::random_field(g, rng));
    EXPECT_LE(oracle::rel_diff(ObservationForm(spec, Observation::Sharp).apply(w), 0.6 * w), 1e-12);
}

TEST(SharpObservation, LobpcgMatchesDenseEigenvalue) {
    auto g = WaveguideGrid::make(1, 1, 2, {32, 16});
    const auto region = box_region(0.0, pi, 0.0, pi, 1.2);
    for (auto kind : {Observation::Smooth, Observation::Sharp}) {
        const auto spec = spec_for(build_chi(region, g), 2.0, 0.0, true);
        const ObservationForm form(spec, kind);
        const int n = static_cast<int>(g->size());
        Eigen::MatrixXcd A(n, n);
        for (int b = 0; b < n; ++b) {
            Field e(g, Representation::Spectral);
            e[b] = 1.0;
            const Field col = form.apply(e);
            for (int a = 0; a < n; ++a) A(a, b) = col[a];
        }
        const double dense = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(A, Eigen::EigenvaluesOnly).eigenvalues()(0);
        ObservabilityOptions opt;
        opt.observation = kind;
        opt.coarse_radius = 0.6;  // leave part of the band to the diagonal
        const auto rep = observability_constant(spec, opt);
        ASSERT_TRUE(rep.observable) << rep.message << " residual " << rep.residual;
        EXPECT_NEAR(rep.lambda_min / dense, 1.0, 1e-8) << to_string(kind);
        EXPECT_LT(rep.coarse_size, n);
    }
}

TEST(SharpObservation, RefinementCannotIncreaseLambdaMin) {
    // The sharp form on the finer band contains the coarser one as a block.
    const auto region = box_region(0.0, pi, 0.0, pi, 0.4);
    std::vector<double> lambdas;
    for (int N : {16, 32}) {
        auto g = WaveguideGrid::make(1, 1, 1, {N, N});
        const auto spec = GramianSpec::make(CutoffChi::sharp_indicator(region, g), TimeCutoff::unit(1.0), 0.0,
                                            TimeQuadrature::make(QuadratureRule::GaussLegendre, 1.0, 32));
        ObservabilityOptions opt;
        opt.observation = Observation::Sharp;
        const auto rep = observability_constant(spec, opt);
        ASSERT_TRUE(rep.observable) << rep.message;
        lambdas.push_back(rep.lambda_min);
    }
    EXPECT_LE(lambdas[1], lambdas[0] * (1 + 1e-9));
    EXPECT_GE(lambdas[1], 0.9 * lambdas[0]);
}
