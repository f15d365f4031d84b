#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "test_support.hpp"
#include "wgc/field.hpp"

using namespace wgc;
using wgc::oracle::max_diff;
using wgc::oracle::random_field;

namespace {

std::vector<GridPtr> grid_matrix() {
    return {WaveguideGrid::make(1, 1, 1, {8, 8}),   WaveguideGrid::make(1, 1, 2, {16, 8}),
            WaveguideGrid::make(1, 2, 1, {8, 4, 6}), WaveguideGrid::make(2, 1, 2, {8, 8, 4}),
            WaveguideGrid::make(1, 1, 4, {32, 4})};
}

Field e_iy(const GridPtr& g) {
    return Field::from_function(g, [](const std::vector<double>& z) { return std::polar(1.0, z.back()); });
}

}  // namespace

TEST(Grid, RejectsBadShapes) {
    EXPECT_THROW(WaveguideGrid(0, 1, 1, {8, 8}), ContractError);
    EXPECT_THROW(WaveguideGrid(1, 0, 1, {8, 8}), ContractError);
    EXPECT_THROW(WaveguideGrid(1, 1, 0, {8, 8}), ContractError);
    EXPECT_THROW(WaveguideGrid(1, 1, 1, {8}), ContractError);
    EXPECT_THROW(WaveguideGrid(1, 1, 1, {7, 8}), ContractError);
    EXPECT_THROW(WaveguideGrid(1, 1, 1, {2, 8}), ContractError);
}

TEST(Grid, FrequencyLattice) {
    auto g = WaveguideGrid::make(1, 1, 2, {8, 4});
    EXPECT_DOUBLE_EQ(g->frequency(0, 1), 0.5);
    EXPECT_DOUBLE_EQ(g->frequency(0, 4), -2.0);  // Nyquist on the negative side
    EXPECT_DOUBLE_EQ(g->frequency(1, 2), -2.0);
    EXPECT_DOUBLE_EQ(g->frequency(1, 3), -1.0);
    EXPECT_NEAR(g->volume(), 4 * pi * 2 * pi, 1e-12);
    EXPECT_EQ(g->flatten(g->unflatten(29)), 29u);
}

TEST(Transform, ZeroFieldStaysZero) {
    auto g = WaveguideGrid::make(1, 1, 2, {8, 4});
    const Field z = Field::zeros(g);
    EXPECT_EQ(max_abs(to_spectral(z)), 0.0);
}

TEST(Transform, PureModeHasSingleCoefficient) {
    for (const auto& g : grid_matrix()) {
        const Field F = to_spectral(e_iy(g));
        std::vector<int> idx(g->dim(), 0);
        idx.back() = 1;
        const std::size_t at = g->flatten(idx);
        for (std::size_t i = 0; i < F.size(); ++i) {
            const double expect = i == at ? 1.0 : 0.0;
            EXPECT_NEAR(std::abs(F[i] - expect), 0.0, 1e-12);
        }
    }
}

TEST(Transform, MatchesHandRolledDft) {
    std::mt19937_64 rng(3);
    // 4-point 1D-like field: the smallest legal grid is 4 x 4.
    for (const auto& g : {WaveguideGrid::make(1, 1, 1, {4, 4}), WaveguideGrid::make(1, 1, 3, {6, 4}),
                          WaveguideGrid::make(2, 1, 1, {4, 4, 6})}) {
        const Field f = random_field(g, rng);
        const auto expect = oracle::naive_dft(f);
        const Field F = to_spectral(f);
        for (std::size_t i = 0; i < F.size(); ++i) EXPECT_NEAR(std::abs(F[i] - expect[i]), 0.0, 1e-12);
    }
}

TEST(Transform, WrongRepresentationIsContractError) {
    auto g = WaveguideGrid::make(1, 1, 1, {8, 8});
    const Field f = Field::zeros(g);
    EXPECT_THROW(to_physical(f), ContractError);
    EXPECT_THROW(to_spectral(to_spectral(f)), ContractError);
}

TEST(Transform, UnitaryRoundTripAndParseval) {
    std::mt19937_64 rng(17);
    for (const auto& g : grid_matrix()) {
        for (int trial = 0; trial < 40; ++trial) {
            const Field f = random_field(g, rng);
            const Field back = to_physical(to_spectral(f));
            EXPECT_LE(oracle::rel_diff(back, f), 1e-12);
            const double phys = oracle::plain_l2(f);
            EXPECT_NEAR(sobolev_norm(f, 0.0) / phys, 1.0, 1e-12);
            EXPECT_NEAR(l2_norm_physical(f) / phys, 1.0, 1e-12);
        }
    }
}

TEST(Multiplier, IdentityAndLaplacianEigenfunction) {
    std::mt19937_64 rng(5);
    auto g = WaveguideGrid::make(1, 2, 2, {8, 6, 4});
    const Field f = random_field(g, rng);
    const Field same = apply_multiplier(f, [](std::span<const double>) { return cplx(1.0); });
    EXPECT_LE(max_diff(same, f), 1e-12);
    const Field u = e_iy(g);
    const Field lap = apply_multiplier(u, [](std::span<const double> xi) {
        double s = 0;
        for (double x : xi) s += x * x;
        return cplx(-s);
    });
    EXPECT_LE(max_diff(lap, -1.0 * u), 1e-12);
}

TEST(Multiplier, SemigroupOfBesselSymbols) {
    std::mt19937_64 rng(6);
    auto g = WaveguideGrid::make(1, 1, 2, {16, 8});
    const Field f = random_field(g, rng);
    auto sym = [](double p) {
        return [p](std::span<const double> xi) {
            double s = 1.0;
            for (double x : xi) s += x * x;
            return cplx(std::pow(s, p));
        };
    };
    const Field twice = apply_multiplier(apply_multiplier(f, sym(-1.0)), sym(-1.0));
    const Field once = apply_multiplier(f, sym(-2.0));
    EXPECT_LE(max_diff(twice, once), 1e-12);
}

TEST(Multiplier, NonFiniteSymbolNamesFrequency) {
    auto g = WaveguideGrid::make(1, 1, 1, {4, 4});
    const Field f = Field::zeros(g);
    try {
        apply_multiplier(f, [](std::span<const double> xi) {
            return cplx(xi[0] == 1.0 && xi[1] == 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
        });
        FAIL() << "expected NumericalError";
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find("(1, 0)"), std::string::npos) << e.what();
    }
}

TEST(Multiplier, DiagonalOperatorsCommute) {
    std::mt19937_64 rng(8);
    auto g = WaveguideGrid::make(2, 1, 2, {8, 8, 4});
    const std::vector<double> theta = {0.3, -1.1, 2.0};
    for (int trial = 0; trial < 10; ++trial) {
        const Field f = random_field(g, rng);
        const Field a = bessel_potential(translate(f, theta), 1.5);
        const Field b = translate(bessel_potential(f, 1.5), theta);
        EXPECT_LE(max_diff(a, b), 1e-12);
        const Field c = apply_multiplier(bessel_potential(f, -0.7), bessel_multiplier(g, 2.0));
        const Field d = bessel_potential(apply_multiplier(f, bessel_multiplier(g, 2.0)), -0.7);
        EXPECT_LE(oracle::rel_diff(c, d), 1e-12);
    }
}

TEST(Sobolev, ConstantAndPureMode) {
    for (const auto& g : grid_matrix()) {
        const cplx c(0.6, -0.8 * 2);
        const Field f = Field::from_function(g, [c](const std::vector<double>&) { return c; });
        for (double s : {-1.0, 0.0, 1.0, 2.5})
            EXPECT_NEAR(sobolev_norm(f, s), std::abs(c) * std::sqrt(g->volume()), 1e-12 * std::sqrt(g->volume()));
        const Field u = e_iy(g);
        EXPECT_NEAR(sobolev_norm(u, 1.0) / sobolev_norm(u, 0.0), std::sqrt(2.0), 1e-12);
    }
}

TEST(Sobolev, DualityCauchySchwarz) {
    std::mt19937_64 rng(12);
    auto g = WaveguideGrid::make(1, 1, 2, {16, 8});
    for (int trial = 0; trial < 100; ++trial) {
        const Field f = random_field(g, rng);
        const Field h = random_field(g, rng);
        const double s = 0.5 * (trial % 5);
        EXPECT_LE(std::abs(duality_pairing(f, h)), sobolev_norm(f, s) * sobolev_norm(h, -s) * (1 + 1e-12));
    }
}

TEST(Sobolev, SesquilinearAndGridChecked) {
    std::mt19937_64 rng(13);
    auto g = WaveguideGrid::make(1, 1, 1, {8, 8});
    const Field f = random_field(g, rng), h = random_field(g, rng);
    const cplx a(0.3, 1.7);
    EXPECT_NEAR(std::abs(sobolev_inner(a * f, h, 1.0) - std::conj(a) * sobolev_inner(f, h, 1.0)), 0.0, 1e-9);
    EXPECT_NEAR(std::abs(sobolev_inner(f, h, 1.0) - std::conj(sobolev_inner(h, f, 1.0))), 0.0, 1e-9);
    auto other = WaveguideGrid::make(1, 1, 1, {8, 4});
    EXPECT_THROW(sobolev_inner(f, Field::zeros(other), 0.0), ContractError);
}

TEST(Translate, IdentityPhaseAndComposition) {
    std::mt19937_64 rng(21);
    auto g = WaveguideGrid::make(1, 1, 2, {16, 8});
    const Field f = random_field(g, rng);
    EXPECT_LE(max_diff(translate(f, std::vector<double>{0.0, 0.0}), f), 1e-12);
    const Field u = e_iy(g);
    EXPECT_LE(max_diff(translate(u, std::vector<double>{0.0, pi}), -1.0 * u), 1e-12);
    const std::vector<double> t1 = {0.4, 1.3}, t2 = {-2.2, 0.9}, t12 = {0.4 - 2.2, 1.3 + 0.9};
    EXPECT_LE(max_diff(translate(translate(f, t1), t2), translate(f, t12)), 1e-12);
}

TEST(Translate, OneGridSpacingEqualsArrayRoll) {
    std::mt19937_64 rng(22);
    for (const auto& g : grid_matrix()) {
        const Field f = random_field(g, rng);
        for (int j = 0; j < g->dim(); ++j) {
            std::vector<double> theta(g->dim(), 0.0);
            std::vector<int> shift(g->dim(), 0);
            theta[j] = g->spacing(j);
            shift[j] = 1;
            // Rolling is exact only when the Nyquist column is absent.
            Field F = to_spectral(f);
            g->for_each_index([&](std::size_t flat, const std::vector<int>& idx) {
                for (int k = 0; k < g->dim(); ++k)
                    if (idx[k] == g->N(k) / 2) F[flat] = 0.0;
            });
            const Field band = to_physical(F);
            EXPECT_LE(max_diff(translate(band, theta), oracle::roll(band, shift)), 1e-12);
        }
    }
}

TEST(Bessel, IdentityCasesAndInverse) {
    std::mt19937_64 rng(31);
    auto g = WaveguideGrid::make(1, 1, 2, {16, 8});
    const Field f = random_field(g, rng);
    EXPECT_LE(max_diff(bessel_potential(f, 0.0), f), 1e-15);
    const Field c = Field::from_function(g, [](const std::vector<double>&) { return cplx(2.0, 1.0); });
    EXPECT_LE(max_diff(bessel_potential(c, 3.3), c), 1e-12);
    const Field u = e_iy(g);
    EXPECT_LE(max_diff(bessel_potential(u, -2.0), 0.5 * u), 1e-12);
    EXPECT_LE(oracle::rel_diff(bessel_potential(bessel_potential(f, 1.7), -1.7), f), 1e-12);
}
