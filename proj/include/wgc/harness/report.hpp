#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wgc/harness/manifest.hpp"

namespace wgc::harness {

/// Minimal CSV reader for files this harness wrote (no quoting).
inline std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(read_file(p));
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(std::move(cells));
    }
    return rows;
}

/// Run directories below `root`: root itself when it holds a manifest,
/// otherwise every immediate subdirectory that does, in name order.
inline std::vector<fs::path> collect_runs(const fs::path& root) {
    if (!fs::is_directory(root)) throw std::runtime_error("not a directory: " + root.string());
    if (fs::exists(root / "manifest.json")) return {root};
    std::vector<fs::path> runs;
    for (const auto& e : fs::directory_iterator(root))
        if (e.is_directory() && fs::exists(e.path() / "manifest.json")) runs.push_back(e.path());
    std::sort(runs.begin(), runs.end());
    if (runs.empty()) throw std::runtime_error("no runs (manifest.json) found under " + root.string());
    return runs;
}

namespace detail {

inline std::string scalar_or_list(const json& j) {
    if (j.is_array()) {
        std::string s;
        for (std::size_t i = 0; i < j.size(); ++i) s += (i ? ";" : "") + scalar_or_list(j[i]);
        return s;
    }
    if (j.is_number_float()) return format_number(j.get<double>());
    if (j.is_string()) return j.get<std::string>();
    return j.dump();
}

inline std::string lookup(const json& cfg, const std::string& block, const std::string& key) {
    if (!cfg.contains(block) || !cfg.at(block).is_object() || !cfg.at(block).contains(key)) return "";
    return scalar_or_list(cfg.at(block).at(key));
}

}  // namespace detail

struct ReportResult {
    fs::path bundle;
    std::vector<fs::path> tables;
    int runs = 0;
};

/// Collates run summaries into `<out>/bundle.csv` (one row per run, keyed by
/// the swept configuration parameters) and concatenates same-named tables
/// across runs into `<out>/bundle_<name>.csv` with a leading run column.
inline ReportResult report(const fs::path& root, fs::path out_dir = {}) {
    if (out_dir.empty()) out_dir = root;
    fs::create_directories(out_dir);
    const auto runs = collect_runs(root);
    struct Run {
        std::string name;
        json manifest;
        std::map<std::string, std::string> summary;
    };
    std::vector<Run> loaded;
    std::set<std::string> keys;
    std::map<std::string, std::vector<std::pair<std::string, fs::path>>> tables;
    for (const auto& dir : runs) {
        Run r;
        r.name = dir == root ? dir.filename().string() : fs::relative(dir, root).string();
        if (r.name.empty() || r.name == ".") r.name = fs::absolute(dir).filename().string();
        r.manifest = load_manifest(dir);
        const fs::path sp = dir / "summary.csv";
        if (fs::exists(sp)) {
            const auto rows = read_csv(sp);
            for (std::size_t i = 1; i < rows.size(); ++i)
                if (rows[i].size() >= 2) {
                    r.summary[rows[i][0]] = rows[i][1];
                    keys.insert(rows[i][0]);
                }
        }
        for (const auto& f : r.manifest.at("files")) {
            const std::string path = f.at("path").get<std::string>();
            if (path.size() > 4 && path.substr(path.size() - 4) == ".csv" && path != "summary.csv")
                tables[path].emplace_back(r.name, dir / path);
        }
        loaded.push_back(std::move(r));
    }

    const std::vector<std::pair<std::string, std::string>> swept = {
        {"time", "T"}, {"grid", "N"}, {"grid", "L"}, {"solver", "s"}, {"solver", "dt"}, {"data", "amplitude"}};
    std::vector<std::string> header = {"run", "experiment", "status", "seed"};
    for (const auto& [b, k] : swept) header.push_back(b + "." + k);
    for (const auto& k : keys) header.push_back(k);
    CsvTable bundle(header);
    for (const auto& r : loaded) {
        const json& cfg = r.manifest.at("config");
        std::vector<Cell> row = {r.name, cfg.value("experiment", std::string()), r.manifest.at("status").get<std::string>(),
                                 cfg.contains("seed") ? detail::scalar_or_list(cfg.at("seed")) : std::string("1")};
        for (const auto& [b, k] : swept) row.push_back(detail::lookup(cfg, b, k));
        for (const auto& k : keys) {
            auto it = r.summary.find(k);
            row.push_back(it == r.summary.end() ? std::string() : it->second);
        }
        bundle.row(std::move(row));
    }
    ReportResult res;
    res.runs = static_cast<int>(loaded.size());
    res.bundle = out_dir / "bundle.csv";
    {
        std::ofstream o(res.bundle, std::ios::trunc);
        o << bundle.str();
    }
    for (const auto& [name, parts] : tables) {
        std::vector<std::string> head;
        std::string body;
        bool consistent = true;
        for (const auto& [run, path] : parts) {
            const auto rows = read_csv(path);
            if (rows.empty()) continue;
            if (head.empty()) head = rows[0];
            if (rows[0] != head) {
                consistent = false;
                break;
            }
            for (std::size_t i = 1; i < rows.size(); ++i) {
                body += run;
                for (const auto& cell : rows[i]) body += "," + cell;
                body += "\n";
            }
        }
        if (!consistent || head.empty()) continue;
        std::string flat = name;
        std::replace(flat.begin(), flat.end(), '/', '_');
        const fs::path p = out_dir / ("bundle_" + flat);
        std::ofstream o(p, std::ios::trunc);
        o << "run";
        for (const auto& h : head) o << "," << h;
        o << "\n" << body;
        res.tables.push_back(p);
    }
    return res;
}

}  // namespace wgc::harness
