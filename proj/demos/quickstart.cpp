// Quickstart: steer a small random state to zero on one cell of R x T, first
// with the linear HUM control, then through the cubic equation.
//
//   build/demo_quickstart

#include <cstdio>
#include <random>

#include "wgc/wgc.hpp"

using namespace wgc;

int main() {
    // One period in x and y; 32 x 32 points.
    auto grid = WaveguideGrid::make(1, 1, 1, {32, 32});

    // Observe x in (0.5, 3), y in (1, 5.5).
    ControlRegion region;
    region.boxes1 = {{Interval{0.5, 3.0}}};
    region.boxes2 = {{Interval{1.0, 5.5}}};
    region.margin = 0.8;
    const CutoffChi chi = build_chi(region, grid);

    // A smooth, band-limited initial state of H^1 norm 0.05.
    std::mt19937_64 rng(1);
    std::normal_distribution<double> normal;
    Field u0(grid, Representation::Spectral);
    grid->for_each_index([&](std::size_t flat, const std::vector<int>& idx) {
        if (std::abs(WaveguideGrid::signed_index(idx[0], 32)) <= 2 && std::abs(WaveguideGrid::signed_index(idx[1], 32)) <= 2)
            u0[flat] = {normal(rng), normal(rng)};
    });
    u0 *= 0.05 / sobolev_norm(u0, 1.0);
    u0 = to_physical(u0);

    const double T = 2.0, s = 1.0;
    HumSolveConfig hum;
    hum.max_iterations = 2000;
    hum.gramian = GramianSpec::make(chi, build_phi(T), s, TimeQuadrature::make(QuadratureRule::GaussLegendre, T, 512));
    const auto lin = linear_null_control(u0, hum);
    std::printf("linear:    %d CG iterations, ||u(T)||/||u0|| = %.3e (doubled quadrature %.3e)\n", lin.cg_iterations,
                lin.final_norm / lin.initial_norm, lin.refined_final_norm / lin.initial_norm);

    NlsParams nls;
    nls.epsilon = -1;
    nls.dt = 0.01;
    hum.gramian = matched_gramian(chi, build_phi(T), s, T, nls.dt);
    const auto nl = nonlinear_null_control(u0, nls, FixedPointConfig{}, hum);
    for (const auto& row : nl.fixed_point)
        std::printf("  sweep %d: %d CG iterations, update %.3e\n", row.sweep, row.cg_iterations, row.update_norm);
    std::printf("nonlinear: %s, ||u(T)||/||u0|| = %.3e, contraction %.3e\n", nl.status.c_str(),
                nl.final_norm / nl.initial_norm, nl.contraction_factor);
    return nl.converged ? 0 : 1;
}
