#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"
#include "wgc/observability.hpp"
#include "wgc/regions.hpp"

using namespace wgc;

namespace {

// Membership written from scratch: x lies in the open arc (lo + a, hi - a)
// modulo 2*pi.
bool in_arc(double x, const Interval& iv, double a) {
    if (iv.hi - iv.lo >= two_pi) return true;
    double d = x - iv.lo;
    while (d < 0) d += two_pi;
    while (d >= two_pi) d -= two_pi;
    return d > a && d < (iv.hi - iv.lo) - a;
}

bool in_union(const std::vector<Box>& boxes, const std::vector<double>& z, int offset, double a) {
    for (const auto& b : boxes) {
        bool all = true;
        for (std::size_t j = 0; j < b.size(); ++j) all = all && in_arc(z[offset + j], b[j], a);
        if (all) return true;
    }
    return false;
}

ControlRegion random_region(std::mt19937_64& rng, int m, int n, double margin) {
    std::uniform_real_distribution<double> lo(0.0, two_pi), len(4 * margin, 3.5);
    std::uniform_int_distribution<int> count(1, 2);
    ControlRegion r;
    r.margin = margin;
    auto boxes = [&](int d) {
        std::vector<Box> out(count(rng));
        for (auto& b : out) {
            for (int j = 0; j < d; ++j) {
                const double a = lo(rng);
                b.push_back({a, a + len(rng)});
            }
        }
        return out;
    };
    r.boxes1 = boxes(m);
    r.boxes2 = boxes(n);
    return r;
}

ControlRegion half_cell(double margin) {
    ControlRegion r;
    r.boxes1 = {{Interval{0.0, pi}}};
    r.boxes2 = {{Interval{0.0, two_pi}}};
    r.margin = margin;
    return r;
}

}  // namespace

TEST(BuildChi, WholeDomainIsOne) {
    auto g = WaveguideGrid::make(1, 1, 2, {16, 8});
    const auto chi = build_chi(ControlRegion::whole(1, 1), g);
    for (const auto& v : chi.samples.values()) EXPECT_EQ(v, cplx(1.0));
}

TEST(BuildChi, PlateauAndZeroSamples) {
    auto g = WaveguideGrid::make(1, 1, 1, {64, 8});
    const auto chi = build_chi(half_cell(pi / 8), g);
    for (int iy = 0; iy < 8; ++iy) {
        EXPECT_EQ(chi.samples[g->flatten({16, iy})].real(), 1.0);  // x = pi/2
        EXPECT_EQ(chi.samples[g->flatten({48, iy})].real(), 0.0);  // x = 3pi/2
    }
}

TEST(BuildChi, UnresolvableMarginSuggestsN) {
    auto g = WaveguideGrid::make(1, 1, 1, {16, 8});
    try {
        build_chi(half_cell(0.2), g);
        FAIL();
    } catch (const ContractError& e) {
        EXPECT_NE(std::string(e.what()).find("N[0] >= 96"), std::string::npos) << e.what();
    }
}

TEST(BuildChi, SandwichPeriodicityRange) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        const int L = 1 + trial % 3;
        auto g = WaveguideGrid::make(1, 2, L, {48 * L, 48, 32});
        const auto region = random_region(rng, 1, 2, 0.6);
        const auto chi = build_chi(region, g);
        g->for_each_index([&](std::size_t flat, const std::vector<int>& idx) {
            std::vector<double> z(3);
            for (int j = 0; j < 3; ++j) z[j] = g->coord(j, idx[j]);
            const double c = chi.samples[flat].real();
            EXPECT_EQ(chi.samples[flat].imag(), 0.0);
            EXPECT_GE(c, 0.0);
            EXPECT_LE(c, 1.0);
            const bool outer = in_union(region.boxes1, z, 0, 0.0) && in_union(region.boxes2, z, 1, 0.0);
            const bool inner = in_union(region.boxes1, z, 0, region.margin) &&
                               in_union(region.boxes2, z, 1, region.margin);
            if (!outer) {
                EXPECT_EQ(c, 0.0);
            }
            if (inner) {
                EXPECT_EQ(c, 1.0);
            }
            // Identical on every supercell copy.
            std::vector<int> shifted(idx);
            shifted[0] = (idx[0] + 48) % g->N(0);
            EXPECT_EQ(chi.samples[g->flatten(shifted)], chi.samples[flat]);
        });
    }
}

TEST(BuildChi, RegionValidation) {
    ControlRegion r = half_cell(0.0);
    EXPECT_THROW(r.validate(1, 1), ContractError);  // margin 0 on a proper subset
    r.margin = 2.0;
    EXPECT_THROW(r.validate(1, 1), ContractError);  // shrunk box empty
    r.margin = 0.5;
    EXPECT_NO_THROW(r.validate(1, 1));
    r.boxes2.clear();
    EXPECT_THROW(r.validate(1, 1), ContractError);
}

TEST(BuildPhi, PlateauZeroMonotone) {
    EXPECT_THROW(build_phi(0.0), ContractError);
    EXPECT_THROW(build_phi(-1.0), ContractError);
    const double T = 1.7;
    const auto phi = build_phi(T);
    EXPECT_EQ(phi(0.0), 1.0);
    EXPECT_EQ(phi(T), 0.0);
    EXPECT_EQ(phi(0.5 * T), 1.0);
    EXPECT_EQ(phi(0.75 * T), 0.0);
    EXPECT_GT(phi(0.6 * T), 0.0);
    EXPECT_LT(phi(0.6 * T), 1.0);
    std::vector<double> nodes;
    for (int i = 0; i <= 200; ++i) nodes.push_back(T * i / 200.0);
    const auto v = build_phi(T, nodes);
    for (std::size_t i = 1; i < v.size(); ++i) EXPECT_LE(v[i], v[i - 1]);
    EXPECT_EQ(TimeCutoff::unit(T)(0.9 * T), 1.0);
}

TEST(Commutator, TrivialCases) {
    std::mt19937_64 rng(9);
    auto g = WaveguideGrid::make(1, 1, 2, {64, 32});
    const Field f = oracle::random_field(g, rng);
    const auto one = CutoffChi::constant(g, 1.0);
    EXPECT_LE(max_abs(commutator_apply(one, 1.0, f)), 1e-12 * max_abs(f) * 10);
    const auto chi = build_chi(random_region(rng, 1, 1, 0.8), g);
    EXPECT_EQ(max_abs(commutator_apply(chi, 0.0, f)), 0.0);
}

TEST(Commutator, MatchesComposedOperators) {
    std::mt19937_64 rng(10);
    auto g = WaveguideGrid::make(1, 1, 1, {32, 16});
    const auto chi = build_chi(half_cell(0.8), g);
    const Field f = oracle::random_field(g, rng);
    // chi * <D>^s f - <D>^s (chi f), each factor through an explicit multiplier.
    const Multiplier lift = Multiplier::from_symbol(g, [](std::span<const double> xi) {
        return cplx(std::sqrt(1.0 + xi[0] * xi[0] + xi[1] * xi[1]));
    });
    Field a = apply_multiplier(f, lift);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] *= chi.samples[i].real();
    Field cf = f;
    for (std::size_t i = 0; i < cf.size(); ++i) cf[i] *= chi.samples[i].real();
    const Field expect = a - apply_multiplier(cf, lift);
    EXPECT_LE(oracle::max_diff(commutator_apply(chi, 1.0, f), expect), 1e-12 * max_abs(expect));
}

TEST(Commutator, OrderOneLowerThanTheLift) {
    auto g = WaveguideGrid::make(1, 1, 1, {128, 8});
    const auto chi = build_chi(half_cell(pi / 4), g);
    double prev_comm = 0.0, prev_lift = 0.0;
    for (int k : {4, 8, 16, 32}) {
        const Field e = to_physical(Field::mode(g, {k, 0}));
        const double comm = l2_norm_physical(commutator_apply(chi, 1.0, e)) / l2_norm_physical(e);
        const double lift = sobolev_norm(e, 0.0) / sobolev_norm(e, -1.0);
        if (prev_comm > 0.0) {
            EXPECT_LT(comm / prev_comm, 1.2);   // bounded
            EXPECT_GT(lift / prev_lift, 1.8);   // grows like |k|
        }
        prev_comm = comm;
        prev_lift = lift;
    }
}

TEST(Commutator, SweepSlopeTracksOrder) {
    auto g = WaveguideGrid::make(1, 1, 1, {256, 8});
    const auto chi = build_chi(half_cell(pi / 4), g);
    for (double s : {1.0, 2.0}) {
        const auto sweep = commutator_growth(chi, s, 0, {32, 40, 48, 56, 64});
        EXPECT_NEAR(sweep.slope, s - 1.0, 0.3) << "s=" << s;
    }
}
