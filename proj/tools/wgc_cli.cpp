// wgc: run, validate and collate waveguide control experiments.
//
// Exit codes: 0 ok, 1 invariant failure (or runtime error), 2 configuration error.

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>
#include <string>

#include "wgc/harness/config.hpp"
#include "wgc/harness/experiments.hpp"
#include "wgc/harness/report.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_invariant = 1;
constexpr int exit_config = 2;

unsigned env_threads() {
    if (const char* v = std::getenv("WGC_THREADS")) {
        try {
            const long n = std::stol(v);
            if (n >= 1) return static_cast<unsigned>(n);
        } catch (const std::exception&) {
        }
        spdlog::warn("ignoring invalid WGC_THREADS='{}'", v);
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace wgc::harness;
    CLI::App app{"Waveguide NLS control experiments"};
    app.require_subcommand(1);

    unsigned threads = env_threads();
    std::string level = "info";
    app.add_option("-j,--threads", threads, "Worker threads (default: $WGC_THREADS or 1)")->check(CLI::PositiveNumber);
    app.add_option("--log-level", level, "trace, debug, info, warn, error, off")
        ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

    std::string config_path, output;
    auto* run = app.add_subcommand("run", "Execute an experiment configuration");
    run->add_option("config", config_path, "Configuration file (JSON)")->required();
    run->add_option("-o,--output", output, "Output directory (default: the config's \"output\" or runs/<name>)");

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "Parse and validate a configuration without running it");
    validate->add_option("config", validate_path, "Configuration file (JSON)")->required();

    std::string report_dir, report_out;
    auto* rep = app.add_subcommand("report", "Collate run directories into a CSV bundle");
    rep->add_option("dir", report_dir, "Run directory or a directory of runs")->required();
    rep->add_option("-o,--output", report_out, "Where to write bundle CSVs (default: dir)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? exit_ok : exit_config;
    }
    spdlog::set_level(spdlog::level::from_str(level));
    spdlog::set_pattern("[%l] %v");

    if (*validate) {
        try {
            const auto cfg = load_config(validate_path);
            spdlog::info("{}: valid {} configuration", validate_path, to_string(cfg.kind));
            return exit_ok;
        } catch (const ConfigError& e) {
            spdlog::error("{}", e.what());
            return exit_config;
        }
    }

    if (*run) {
        ExperimentConfig cfg;
        try {
            cfg = load_config(config_path);
        } catch (const ConfigError& e) {
            spdlog::error("{}", e.what());
            return exit_config;
        }
        fs::path dir = !output.empty() ? fs::path(output)
                       : !cfg.output.empty() ? fs::path(cfg.output)
                                             : fs::path("runs") / fs::path(config_path).stem();
        spdlog::info("running {} into {} with {} thread(s)", to_string(cfg.kind), dir.string(), threads);
        try {
            const int code = run_experiment(cfg, dir, threads);
            const auto manifest = load_manifest(dir);
            for (const auto& inv : manifest.at("invariants")) {
                const bool passed = inv.at("passed").get<bool>();
                const auto msg = inv.at("name").get<std::string>() + " (" + inv.at("detail").get<std::string>() + ")";
                if (passed) spdlog::info("PASS {}", msg);
                else spdlog::error("FAIL {}", msg);
            }
            if (manifest.contains("error")) spdlog::error("runtime failure: {}", manifest.at("error").get<std::string>());
            spdlog::info("status: {}", manifest.at("status").get<std::string>());
            return code == 0 ? exit_ok : exit_invariant;
        } catch (const ConfigError& e) {
            spdlog::error("{}", e.what());
            return exit_config;
        }
    }

    if (*rep) {
        try {
            const auto res = report(report_dir, report_out);
            spdlog::info("collated {} run(s) into {}", res.runs, res.bundle.string());
            for (const auto& t : res.tables) spdlog::debug("table {}", t.string());
            return exit_ok;
        } catch (const std::exception& e) {
            spdlog::error("{}", e.what());
            return exit_config;
        }
    }
    return exit_ok;
}
