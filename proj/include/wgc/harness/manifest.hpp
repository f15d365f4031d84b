#pragma once

#include <nlohmann/json.hpp>

#include <chrono>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "wgc/field_io.hpp"

namespace wgc::harness {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr const char* code_version = "wgc 1.0.0";

/// 64-bit FNV-1a of a byte range.
inline std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
    return buf;
}

/// Round-trip formatting for CSV cells.
inline std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

using Cell = std::variant<std::string, double, long long>;

inline std::string format_cell(const Cell& c) {
    if (auto s = std::get_if<std::string>(&c)) {
        std::string v = *s;
        for (auto& ch : v)
            if (ch == ',' || ch == '\n') ch = ';';
        return v;
    }
    if (auto d = std::get_if<double>(&c)) return format_number(*d);
    return std::to_string(std::get<long long>(c));
}

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    CsvTable& row(std::vector<Cell> cells) {
        if (cells.size() != header_.size()) throw std::logic_error("csv: row width differs from header");
        rows_.push_back(std::move(cells));
        return *this;
    }

    std::string str() const {
        std::string out;
        for (std::size_t i = 0; i < header_.size(); ++i) out += (i ? "," : "") + header_[i];
        out += "\n";
        for (const auto& r : rows_) {
            for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + format_cell(r[i]);
            out += "\n";
        }
        return out;
    }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<Cell>> rows_;
};

struct Invariant {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Collects the artifacts of one run and writes manifest.json at the end.
class RunWriter {
public:
    explicit RunWriter(fs::path dir) : dir_(std::move(dir)), start_(clock::now()) { fs::create_directories(dir_); }

    const fs::path& dir() const { return dir_; }

    void write_text(const std::string& name, const std::string& content) {
        const fs::path p = dir_ / name;
        fs::create_directories(p.parent_path());
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        out << content;
        if (!out) throw std::runtime_error("cannot write " + p.string());
        files_.push_back(name);
    }
    void write_csv(const std::string& name, const CsvTable& t) { write_text(name, t.str()); }
    void write_field(const std::string& name, const Field& f) {
        std::ostringstream os(std::ios::binary);
        io::write_field(os, f);
        write_text(name, os.str());
    }

    void summary(const std::string& key, Cell value) { summary_.emplace_back(key, std::move(value)); }

    void invariant(const std::string& name, bool passed, const std::string& detail = "") {
        invariants_.push_back({name, passed, detail});
    }
    bool all_passed() const {
        for (const auto& i : invariants_)
            if (!i.passed) return false;
        return true;
    }
    const std::vector<Invariant>& invariants() const { return invariants_; }

    void stage(const std::string& name, double seconds) { stages_.emplace_back(name, seconds); }

    /// Times fn() and records it as a stage.
    template <class Fn>
    auto timed(const std::string& name, Fn&& fn) {
        const auto t0 = clock::now();
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            stage(name, seconds_since(t0));
        } else {
            auto r = fn();
            stage(name, seconds_since(t0));
            return r;
        }
    }

    /// Writes summary.csv and, atomically, manifest.json.
    void finalize(const json& config, const std::string& status, unsigned threads, const std::string& error = "") {
        CsvTable s({"key", "value"});
        for (const auto& [k, v] : summary_) s.row({k, v});
        write_csv("summary.csv", s);

        json m;
        m["code_version"] = code_version;
        m["config"] = config;
        m["status"] = status;
        if (!error.empty()) m["error"] = error;
        m["threads"] = threads;
        m["wall_clock_seconds"] = seconds_since(start_);
        m["stages"] = json::array();
        for (const auto& [n, t] : stages_) m["stages"].push_back({{"name", n}, {"seconds", t}});
        m["invariants"] = json::array();
        for (const auto& i : invariants_)
            m["invariants"].push_back({{"name", i.name}, {"passed", i.passed}, {"detail", i.detail}});
        m["files"] = json::array();
        for (const auto& f : files_) {
            const std::string bytes = read_file(dir_ / f);
            m["files"].push_back({{"path", f}, {"bytes", bytes.size()}, {"fnv1a64", hex64(fnv1a64(bytes))}});
        }
        const fs::path tmp = dir_ / "manifest.json.tmp";
        {
            std::ofstream out(tmp, std::ios::trunc);
            out << m.dump(2) << "\n";
            if (!out) throw std::runtime_error("cannot write " + tmp.string());
        }
        fs::rename(tmp, dir_ / "manifest.json");
    }

private:
    using clock = std::chrono::steady_clock;
    static double seconds_since(clock::time_point t0) {
        return std::chrono::duration<double>(clock::now() - t0).count();
    }

    fs::path dir_;
    clock::time_point start_;
    std::vector<std::string> files_;
    std::vector<std::pair<std::string, Cell>> summary_;
    std::vector<Invariant> invariants_;
    std::vector<std::pair<std::string, double>> stages_;
};

/// Loads and verifies a manifest: parse errors, missing files and checksum
/// mismatches are reported as std::runtime_error.
inline json load_manifest(const fs::path& dir) {
    const fs::path p = dir / "manifest.json";
    if (!fs::exists(p)) throw std::runtime_error("no manifest.json in " + dir.string());
    json m;
    try {
        m = json::parse(read_file(p));
    } catch (const json::exception& e) {
        throw std::runtime_error("corrupt manifest " + p.string() + ": " + e.what());
    }
    if (!m.contains("files") || !m.contains("config") || !m.contains("status"))
        throw std::runtime_error("corrupt manifest " + p.string() + ": missing required keys");
    for (const auto& f : m.at("files")) {
        const fs::path fp = dir / f.at("path").get<std::string>();
        if (!fs::exists(fp)) throw std::runtime_error("manifest lists missing file " + fp.string());
        if (hex64(fnv1a64(read_file(fp))) != f.at("fnv1a64").get<std::string>())
            throw std::runtime_error("checksum mismatch for " + fp.string());
    }
    return m;
}

}  // namespace wgc::harness
