#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "wgc/field.hpp"
#include "wgc/grid.hpp"
#include "wgc/hum.hpp"
#include "wgc/regions.hpp"

namespace wgc::harness {

using nlohmann::json;

/// Invalid or incomplete configuration; `path` names the offending field.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string path, const std::string& what)
        : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

enum class ExperimentKind {
    ObservabilitySweep,
    StationaryEstimate,
    LinearNullControl,
    NonlinearNullControl,
    ExactControl,
    XsbChecks,
};

inline const std::vector<std::pair<std::string, ExperimentKind>>& experiment_names() {
    static const std::vector<std::pair<std::string, ExperimentKind>> names = {
        {"observability-sweep", ExperimentKind::ObservabilitySweep},
        {"stationary-estimate", ExperimentKind::StationaryEstimate},
        {"linear-null-control", ExperimentKind::LinearNullControl},
        {"nonlinear-null-control", ExperimentKind::NonlinearNullControl},
        {"exact-control", ExperimentKind::ExactControl},
        {"xsb-checks", ExperimentKind::XsbChecks},
    };
    return names;
}

inline std::string to_string(ExperimentKind k) {
    for (const auto& [n, v] : experiment_names())
        if (v == k) return n;
    return "?";
}

struct GridBlock {
    int m = 1, n = 1, L = 1;
    std::vector<int> N;
};

struct TimeBlock {
    std::vector<double> T;  // several values sweep (observability-sweep only)
    int Nt = 64;
    QuadratureRule rule = QuadratureRule::GaussLegendre;
    bool smooth_phi = false;
    bool converge = false;         // double Nt until the Gramian quadrature converges
    double converge_tolerance = 1e-10;
    int max_nodes = 4096;
};

struct SolverBlock {
    double s = 0.0;
    double dt = 5e-3;
    int epsilon = -1;
    bool nonlinear = true;
    bool dealias = true;
    double cg_tolerance = 1e-10;
    int cg_max_iterations = 500;
    double fp_tolerance = 1e-10;
    int max_sweeps = 30;
    double relaxation = 1.0;
    double eta = 1.0;
    double delta = 1.0;
};

struct DataBlock {
    double amplitude = 1e-2;         // ||u0||_{H^s}
    double target_amplitude = 0.0;   // ||u_f||_{H^s} (exact control)
    int band = 4;                    // signed-index band of random data
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::ObservabilitySweep;
    json raw;  // echoed in the manifest
    GridBlock grid;
    bool has_region = false;
    ControlRegion region;
    bool sharp_chi = false;  // use the indicator of Omega as chi
    bool has_time = false;
    TimeBlock time;
    SolverBlock solver;
    DataBlock data;
    std::uint64_t seed = 1;
    std::string output;
    json checks = json::object();   // thresholds for asserted invariants
    json options = json::object();  // experiment-specific knobs

    template <class T>
    T check(const std::string& key, T fallback) const {
        return checks.contains(key) ? checks.at(key).get<T>() : fallback;
    }
    template <class T>
    T option(const std::string& key, T fallback) const {
        return options.contains(key) ? options.at(key).get<T>() : fallback;
    }
};

namespace detail {

template <class T>
T get(const json& j, const std::string& path, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(path + "." + key, std::string("wrong type (") + e.what() + ")");
    }
}

template <class T>
T need(const json& j, const std::string& path, const char* key) {
    if (!j.contains(key)) throw ConfigError(path + "." + key, "missing required field");
    return get<T>(j, path, key, T{});
}

inline std::vector<Box> parse_boxes(const json& j, const std::string& path, int dim) {
    if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a nonempty list of boxes");
    std::vector<Box> boxes;
    for (std::size_t b = 0; b < j.size(); ++b) {
        const std::string bp = path + "[" + std::to_string(b) + "]";
        const auto& box = j[b];
        if (!box.is_array() || static_cast<int>(box.size()) != dim)
            throw ConfigError(bp, "expected " + std::to_string(dim) + " intervals [lo, hi]");
        Box out;
        for (std::size_t k = 0; k < box.size(); ++k) {
            const auto& iv = box[k];
            if (!iv.is_array() || iv.size() != 2 || !iv[0].is_number() || !iv[1].is_number())
                throw ConfigError(bp + "[" + std::to_string(k) + "]", "expected [lo, hi]");
            out.push_back({iv[0].get<double>(), iv[1].get<double>()});
        }
        boxes.push_back(std::move(out));
    }
    return boxes;
}

}  // namespace detail

inline bool needs_region(ExperimentKind k) { return k != ExperimentKind::XsbChecks; }
inline bool needs_time(ExperimentKind k) {
    return k != ExperimentKind::StationaryEstimate && k != ExperimentKind::XsbChecks;
}

/// Parses and validates; every failure is a ConfigError naming the field.
inline ExperimentConfig parse_config(const json& j) {
    if (!j.is_object()) throw ConfigError("$", "configuration must be a JSON object");
    ExperimentConfig c;
    c.raw = j;
    const auto kind = detail::need<std::string>(j, "$", "experiment");
    bool found = false;
    for (const auto& [n, v] : experiment_names())
        if (n == kind) c.kind = v, found = true;
    if (!found) throw ConfigError("$.experiment", "unknown experiment kind '" + kind + "'");

    if (!j.contains("grid")) throw ConfigError("grid", "missing required block");
    const auto& g = j.at("grid");
    c.grid.m = detail::need<int>(g, "grid", "m");
    c.grid.n = detail::need<int>(g, "grid", "n");
    c.grid.L = detail::get<int>(g, "grid", "L", 1);
    c.grid.N = detail::need<std::vector<int>>(g, "grid", "N");
    try {
        WaveguideGrid(c.grid.m, c.grid.n, c.grid.L, c.grid.N);
    } catch (const ContractError& e) {
        throw ConfigError("grid", e.what());
    }

    if (j.contains("region")) {
        const auto& r = j.at("region");
        c.has_region = true;
        c.sharp_chi = detail::get<std::string>(r, "region", "cutoff", "smooth") == "sharp";
        if (detail::get<bool>(r, "region", "whole", false)) {
            c.region = ControlRegion::whole(c.grid.m, c.grid.n);
        } else {
            if (!r.contains("omega1")) throw ConfigError("region.omega1", "missing required field");
            if (!r.contains("omega2")) throw ConfigError("region.omega2", "missing required field");
            c.region.boxes1 = detail::parse_boxes(r.at("omega1"), "region.omega1", c.grid.m);
            c.region.boxes2 = detail::parse_boxes(r.at("omega2"), "region.omega2", c.grid.n);
            c.region.margin = detail::get<double>(r, "region", "margin", 0.0);
        }
        try {
            c.region.validate(c.grid.m, c.grid.n);
        } catch (const ContractError& e) {
            throw ConfigError("region", e.what());
        }
    } else if (needs_region(c.kind)) {
        throw ConfigError("region", "missing required block for experiment '" + kind + "'");
    }

    if (j.contains("time")) {
        const auto& t = j.at("time");
        c.has_time = true;
        if (!t.contains("T")) throw ConfigError("time.T", "missing required field");
        if (t.at("T").is_array()) c.time.T = detail::get<std::vector<double>>(t, "time", "T", {});
        else c.time.T = {detail::get<double>(t, "time", "T", 1.0)};
        if (c.time.T.empty()) throw ConfigError("time.T", "needs at least one horizon");
        for (double T : c.time.T)
            if (!(T > 0.0)) throw ConfigError("time.T", "horizons must be positive");
        if (c.time.T.size() > 1 && c.kind != ExperimentKind::ObservabilitySweep)
            throw ConfigError("time.T", "a list of horizons is only accepted by observability-sweep");
        c.time.Nt = detail::get<int>(t, "time", "Nt", 64);
        if (c.time.Nt < 8) throw ConfigError("time.Nt", "must be at least 8");
        const auto rule = detail::get<std::string>(t, "time", "rule", "gauss-legendre");
        if (rule == "gauss-legendre") c.time.rule = QuadratureRule::GaussLegendre;
        else if (rule == "midpoint") c.time.rule = QuadratureRule::Midpoint;
        else throw ConfigError("time.rule", "expected 'gauss-legendre' or 'midpoint'");
        if (c.time.rule == QuadratureRule::GaussLegendre && c.time.Nt % 8 != 0)
            throw ConfigError("time.Nt", "Gauss-Legendre panels need a multiple of 8 nodes");
        const auto phi = detail::get<std::string>(t, "time", "phi", "unit");
        if (phi != "unit" && phi != "smooth") throw ConfigError("time.phi", "expected 'unit' or 'smooth'");
        c.time.smooth_phi = phi == "smooth";
        c.time.converge = detail::get<bool>(t, "time", "converge", false);
        c.time.converge_tolerance = detail::get<double>(t, "time", "converge_tolerance", 1e-10);
        c.time.max_nodes = detail::get<int>(t, "time", "max_nodes", 4096);
    } else if (needs_time(c.kind)) {
        throw ConfigError("time", "missing required block for experiment '" + kind + "'");
    }

    if (j.contains("solver")) {
        const auto& s = j.at("solver");
        auto& v = c.solver;
        v.s = detail::get<double>(s, "solver", "s", v.s);
        v.dt = detail::get<double>(s, "solver", "dt", v.dt);
        v.epsilon = detail::get<int>(s, "solver", "epsilon", v.epsilon);
        v.nonlinear = detail::get<bool>(s, "solver", "nonlinear", v.nonlinear);
        v.dealias = detail::get<bool>(s, "solver", "dealias", v.dealias);
        v.cg_tolerance = detail::get<double>(s, "solver", "cg_tolerance", v.cg_tolerance);
        v.cg_max_iterations = detail::get<int>(s, "solver", "cg_max_iterations", v.cg_max_iterations);
        v.fp_tolerance = detail::get<double>(s, "solver", "fixed_point_tolerance", v.fp_tolerance);
        v.max_sweeps = detail::get<int>(s, "solver", "max_sweeps", v.max_sweeps);
        v.relaxation = detail::get<double>(s, "solver", "relaxation", v.relaxation);
        v.eta = detail::get<double>(s, "solver", "eta", v.eta);
        v.delta = detail::get<double>(s, "solver", "delta", v.delta);
        if (v.epsilon != 1 && v.epsilon != -1) throw ConfigError("solver.epsilon", "must be +1 or -1");
        if (!(v.dt > 0.0)) throw ConfigError("solver.dt", "must be positive");
        if (!(v.cg_tolerance > 0.0 && v.cg_tolerance < 1.0))
            throw ConfigError("solver.cg_tolerance", "must lie in (0, 1)");
        if (v.cg_max_iterations < 1) throw ConfigError("solver.cg_max_iterations", "must be at least 1");
        if (!(v.relaxation > 0.0 && v.relaxation <= 1.0))
            throw ConfigError("solver.relaxation", "must lie in (0, 1]");
        if (v.max_sweeps < 1) throw ConfigError("solver.max_sweeps", "must be at least 1");
    }
    if (j.contains("data")) {
        const auto& d = j.at("data");
        c.data.amplitude = detail::get<double>(d, "data", "amplitude", c.data.amplitude);
        c.data.target_amplitude = detail::get<double>(d, "data", "target_amplitude", c.data.target_amplitude);
        c.data.band = detail::get<int>(d, "data", "band", c.data.band);
        if (c.data.amplitude < 0.0) throw ConfigError("data.amplitude", "must be nonnegative");
        if (c.data.band < 0) throw ConfigError("data.band", "must be nonnegative");
    }
    c.seed = detail::get<std::uint64_t>(j, "$", "seed", 1);
    c.output = detail::get<std::string>(j, "$", "output", "");
    if (j.contains("checks")) {
        if (!j.at("checks").is_object()) throw ConfigError("checks", "expected an object");
        c.checks = j.at("checks");
    }
    if (j.contains("options")) {
        if (!j.at("options").is_object()) throw ConfigError("options", "expected an object");
        c.options = j.at("options");
    }
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, "cannot open configuration file");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path, std::string("invalid JSON: ") + e.what());
    }
    return parse_config(j);
}

// ---------------------------------------------------------------------------
// Builders shared by experiments

inline GridPtr make_grid(const GridBlock& g, int refine = 1) {
    std::vector<int> N = g.N;
    for (auto& n : N) n *= refine;
    return WaveguideGrid::make(g.m, g.n, g.L, N);
}

inline CutoffChi make_chi(const ExperimentConfig& c, const GridPtr& grid) {
    return c.sharp_chi ? CutoffChi::sharp_indicator(c.region, grid) : build_chi(c.region, grid);
}

inline TimeCutoff make_phi(const ExperimentConfig& c, double T) {
    return c.time.smooth_phi ? build_phi(T) : TimeCutoff::unit(T);
}

/// Random data with signed-index band |k| <= band in every direction,
/// scaled to the requested H^s norm. Drawn from a dedicated stream per
/// `stream` so adding draws elsewhere never shifts it.
inline Field random_data(const GridPtr& grid, int band, double hs_norm, double s, std::uint64_t seed,
                         std::uint64_t stream) {
    std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ull + stream);
    std::normal_distribution<double> normal;
    const auto& g = *grid;
    Field U(grid, Representation::Spectral);
    g.for_each_index([&](std::size_t flat, const std::vector<int>& idx) {
        for (int j = 0; j < g.dim(); ++j)
            if (std::abs(WaveguideGrid::signed_index(idx[j], g.N(j))) > band) return;
        U[flat] = cplx(normal(rng), normal(rng));
    });
    const double n = sobolev_norm(U, s);
    if (n > 0.0) U *= hs_norm / n;
    return to_physical(U);
}

}  // namespace wgc::harness
