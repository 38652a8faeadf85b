/// @file config.hpp
/// @brief Run configuration: a flat INI-style file with sections.
///
///     [scenario]
///     h0 = 0.5
///     bc = navier
///     beta = 0.1
///
/// Every error names the key and the line it came from.
#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "twosphere/drag.hpp"
#include "twosphere/dynamics.hpp"
#include "twosphere/errors.hpp"
#include "twosphere/series.hpp"

namespace twosphere::cli {

class ConfigError : public Error {
public:
    ConfigError(const std::string& key, int line, const std::string& what)
        : Error(describe(key, line, what)), key_(key), line_(line)
    {
    }

    [[nodiscard]] const std::string& key() const noexcept { return key_; }
    [[nodiscard]] int line() const noexcept { return line_; }

private:
    static std::string describe(const std::string& key, int line, const std::string& what)
    {
        const std::string where = line > 0 ? "line " + std::to_string(line) : "defaults/command line";
        return "config error at " + where + ", key '" + key + "': " + what;
    }

    std::string key_;
    int line_;
};

enum class SweepKind { Drag, Simulate };

/// Sweep axes in output order.
inline constexpr std::array<std::string_view, 6> kSweepAxes{"lambda", "beta", "h0", "s0", "f_p", "m"};

struct RunConfig {
    SwimmerScenario scenario;
    bool passive = false;
    double f_ext = 1.0;
    SimulationOptions integrator;
    SeriesTruncation truncation;
    std::string out_dir = ".";

    double drag_h_min = 1e-4;
    double drag_h_max = 100.0;
    int drag_points = 41;

    SweepKind sweep_kind = SweepKind::Drag;
    std::map<std::string, std::vector<double>> sweep_axes;

    /// Source line of each "section.key" read from a file.
    std::map<std::string, int> lines;

    [[nodiscard]] int line_of(const std::string& key) const
    {
        const auto it = lines.find(key);
        return it == lines.end() ? 0 : it->second;
    }
};

/// Shortest text that reads back to the same double (17 significant digits).
[[nodiscard]] inline std::string fmt17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_double(std::string_view text, const std::string& key, int line)
{
    const auto t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
        throw ConfigError(key, line, "expected a number, got '" + std::string(t) + "'");
    }
    if (!std::isfinite(v)) {
        throw ConfigError(key, line, "value must be finite");
    }
    return v;
}

inline int parse_int(std::string_view text, const std::string& key, int line)
{
    const auto t = trim(text);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
        throw ConfigError(key, line, "expected an integer, got '" + std::string(t) + "'");
    }
    return v;
}

inline bool parse_bool(std::string_view text, const std::string& key, int line)
{
    const auto t = trim(text);
    if (t == "true" || t == "yes" || t == "1") {
        return true;
    }
    if (t == "false" || t == "no" || t == "0") {
        return false;
    }
    throw ConfigError(key, line, "expected true or false, got '" + std::string(t) + "'");
}

inline std::vector<double> parse_list(std::string_view text, const std::string& key, int line)
{
    std::vector<double> out;
    if (trim(text).empty()) {
        return out;
    }
    std::size_t start = 0;
    for (;;) {
        const auto comma = text.find(',', start);
        const auto item = trim(text.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                                 : comma - start));
        if (item.empty()) {
            throw ConfigError(key, line, "empty list element");
        }
        out.push_back(parse_double(item, key, line));
        if (comma == std::string_view::npos) {
            return out;
        }
        start = comma + 1;
    }
}

inline std::string choice(std::string_view value, std::initializer_list<std::string_view> allowed,
                          const std::string& key, int line)
{
    const auto v = trim(value);
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
        std::string list;
        for (auto a : allowed) {
            list += (list.empty() ? "" : ", ") + std::string(a);
        }
        throw ConfigError(key, line, "expected one of {" + list + "}, got '" + std::string(v) + "'");
    }
    return std::string(v);
}

} // namespace detail

/// Applies one "section.key = value" assignment.
inline void apply_setting(RunConfig& cfg, const std::string& key, std::string_view value, int line)
{
    using namespace detail;
    auto num = [&] { return parse_double(value, key, line); };
    auto& s = cfg.scenario;
    if (key == "scenario.h0") {
        s.h0 = num();
    } else if (key == "scenario.s0") {
        s.s0 = num();
    } else if (key == "scenario.m") {
        s.m = num();
    } else if (key == "scenario.f_p") {
        s.f_p = num();
    } else if (key == "scenario.lambda") {
        s.lambda = num();
    } else if (key == "scenario.bc") {
        s.bc.kind = choice(value, {"no_slip", "navier"}, key, line) == "navier" ? BcKind::Navier : BcKind::NoSlip;
    } else if (key == "scenario.beta") {
        s.bc.beta = num();
    } else if (key == "scenario.mode") {
        cfg.passive = choice(value, {"active", "passive"}, key, line) == "passive";
    } else if (key == "scenario.f_ext") {
        cfg.f_ext = num();
    } else if (key == "integrator.t_max") {
        cfg.integrator.t_max = num();
    } else if (key == "integrator.h_floor") {
        cfg.integrator.h_floor = num();
    } else if (key == "integrator.rtol") {
        cfg.integrator.rtol = num();
    } else if (key == "integrator.atol") {
        cfg.integrator.atol = num();
    } else if (key == "integrator.max_steps") {
        cfg.integrator.max_steps = parse_int(value, key, line);
    } else if (key == "series.n_max") {
        cfg.truncation.n_max = parse_int(value, key, line);
    } else if (key == "series.tail_tol") {
        cfg.truncation.tail_tol = num();
    } else if (key == "series.adaptive") {
        cfg.truncation.adaptive = parse_bool(value, key, line);
    } else if (key == "series.hard_cap") {
        cfg.truncation.hard_cap = parse_int(value, key, line);
    } else if (key == "drag.h_min") {
        cfg.drag_h_min = num();
    } else if (key == "drag.h_max") {
        cfg.drag_h_max = num();
    } else if (key == "drag.points") {
        cfg.drag_points = parse_int(value, key, line);
    } else if (key == "sweep.kind") {
        cfg.sweep_kind = choice(value, {"drag", "simulate"}, key, line) == "simulate" ? SweepKind::Simulate
                                                                                       : SweepKind::Drag;
    } else if (key.rfind("sweep.", 0) == 0 &&
               std::find(kSweepAxes.begin(), kSweepAxes.end(), std::string_view(key).substr(6)) != kSweepAxes.end()) {
        cfg.sweep_axes[key.substr(6)] = parse_list(value, key, line);
    } else if (key == "output.dir") {
        const auto v = trim(value);
        if (v.empty()) {
            throw ConfigError(key, line, "directory must not be empty");
        }
        cfg.out_dir = std::string(v);
    } else {
        throw ConfigError(key, line, "unknown key");
    }
    if (line > 0) {
        cfg.lines[key] = line;
    }
}

/// Parses configuration text on top of the defaults in `cfg`.
inline void parse_config(std::istream& in, RunConfig& cfg)
{
    std::string raw;
    std::string section;
    int line = 0;
    std::map<std::string, int> seen;
    while (std::getline(in, raw)) {
        ++line;
        auto text = detail::trim(raw);
        if (text.empty() || text.front() == '#' || text.front() == ';') {
            continue;
        }
        if (text.front() == '[') {
            if (text.back() != ']' || text.size() < 3) {
                throw ConfigError(std::string(text), line, "malformed section header");
            }
            section = std::string(detail::trim(text.substr(1, text.size() - 2)));
            continue;
        }
        if (const auto hash = text.find(" #"); hash != std::string_view::npos) {
            text = detail::trim(text.substr(0, hash));
        }
        const auto eq = text.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(std::string(text), line, "expected 'key = value'");
        }
        const auto name = detail::trim(text.substr(0, eq));
        if (name.empty()) {
            throw ConfigError("", line, "missing key before '='");
        }
        if (section.empty()) {
            throw ConfigError(std::string(name), line, "key outside of any [section]");
        }
        const std::string key = section + "." + std::string(name);
        if (const auto it = seen.find(key); it != seen.end()) {
            throw ConfigError(key, line, "duplicate key (first set on line " + std::to_string(it->second) + ")");
        }
        seen[key] = line;
        apply_setting(cfg, key, text.substr(eq + 1), line);
    }
}

inline RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("--config", 0, "cannot open '" + path + "'");
    }
    RunConfig cfg;
    parse_config(in, cfg);
    return cfg;
}

/// Cross-field validation; fills scenario.mode from mode / f_ext.
inline void resolve(RunConfig& cfg)
{
    auto fail = [&](const std::string& key, const std::string& what) {
        throw ConfigError(key, cfg.line_of(key), what);
    };
    auto& s = cfg.scenario;
    if (!(s.h0 > 0.0)) {
        fail("scenario.h0", "must be positive");
    }
    if (s.s0 < 0.0) {
        fail("scenario.s0", "must be non-negative (approach speed)");
    }
    if (s.m < 0.0) {
        fail("scenario.m", "must be non-negative");
    }
    if (s.f_p < 0.0) {
        fail("scenario.f_p", "must be non-negative");
    }
    if (!(s.lambda > 0.0)) {
        fail("scenario.lambda", "must be positive");
    }
    if (s.bc.kind == BcKind::NoSlip && s.bc.beta != 0.0) {
        fail("scenario.beta", "slip length requires bc = navier");
    }
    if (s.bc.kind == BcKind::Navier && !(s.bc.beta >= kMinSeriesGap)) {
        fail("scenario.beta", "navier requires beta >= 1e-8");
    }
    if (cfg.passive && !(cfg.f_ext > 0.0)) {
        fail("scenario.f_ext", "must be positive in passive mode");
    }
    s.mode = cfg.passive ? SwimMode{PassiveForced{cfg.f_ext}} : SwimMode{ActiveSwimmers{}};

    if (!(cfg.integrator.t_max > 0.0)) {
        fail("integrator.t_max", "must be positive");
    }
    if (cfg.integrator.h_floor < 0.0 || (cfg.integrator.h_floor > 0.0 && cfg.integrator.h_floor >= s.h0)) {
        fail("integrator.h_floor", "must be 0 (automatic) or lie in (0, h0)");
    }
    if (s.bc.kind == BcKind::NoSlip && cfg.integrator.h_floor > 0.0 && cfg.integrator.h_floor < kMinSeriesGap) {
        fail("integrator.h_floor", "no-slip runs need h_floor >= 1e-8");
    }
    if (!(cfg.integrator.rtol > 0.0) || cfg.integrator.rtol >= 1.0) {
        fail("integrator.rtol", "must lie in (0, 1)");
    }
    if (!(cfg.integrator.atol > 0.0)) {
        fail("integrator.atol", "must be positive");
    }
    if (cfg.integrator.max_steps < 1) {
        fail("integrator.max_steps", "must be positive");
    }
    if (cfg.truncation.n_max < 1) {
        fail("series.n_max", "must be at least 1");
    }
    if (!(cfg.truncation.tail_tol > 0.0)) {
        fail("series.tail_tol", "must be positive");
    }
    if (cfg.truncation.hard_cap < cfg.truncation.n_max) {
        fail("series.hard_cap", "must not be below n_max");
    }
    if (!(cfg.drag_h_min >= kMinSeriesGap) && s.bc.kind == BcKind::NoSlip) {
        fail("drag.h_min", "no-slip drag needs h_min >= 1e-8");
    }
    if (!(cfg.drag_h_min > 0.0)) {
        fail("drag.h_min", "must be positive");
    }
    if (!(cfg.drag_h_max >= cfg.drag_h_min)) {
        fail("drag.h_max", "must not be below h_min");
    }
    if (cfg.drag_points < 1 || (cfg.drag_points == 1 && cfg.drag_h_max != cfg.drag_h_min)) {
        fail("drag.points", "need at least 2 points for a range (1 when h_min = h_max)");
    }
}

/// Canonical text of the resolved configuration; the report echoes it and
/// the config hash is computed from it.
[[nodiscard]] inline std::string canonical_text(const RunConfig& cfg)
{
    std::ostringstream os;
    const auto& s = cfg.scenario;
    os << "[scenario]\n"
       << "h0 = " << fmt17(s.h0) << "\n"
       << "s0 = " << fmt17(s.s0) << "\n"
       << "m = " << fmt17(s.m) << "\n"
       << "f_p = " << fmt17(s.f_p) << "\n"
       << "lambda = " << fmt17(s.lambda) << "\n"
       << "bc = " << to_string(s.bc.kind) << "\n"
       << "beta = " << fmt17(s.bc.beta) << "\n"
       << "mode = " << (cfg.passive ? "passive" : "active") << "\n"
       << "f_ext = " << fmt17(cfg.f_ext) << "\n"
       << "[integrator]\n"
       << "t_max = " << fmt17(cfg.integrator.t_max) << "\n"
       << "h_floor = " << fmt17(cfg.integrator.h_floor) << "\n"
       << "rtol = " << fmt17(cfg.integrator.rtol) << "\n"
       << "atol = " << fmt17(cfg.integrator.atol) << "\n"
       << "max_steps = " << cfg.integrator.max_steps << "\n"
       << "[series]\n"
       << "n_max = " << cfg.truncation.n_max << "\n"
       << "tail_tol = " << fmt17(cfg.truncation.tail_tol) << "\n"
       << "adaptive = " << (cfg.truncation.adaptive ? "true" : "false") << "\n"
       << "hard_cap = " << cfg.truncation.hard_cap << "\n"
       << "[drag]\n"
       << "h_min = " << fmt17(cfg.drag_h_min) << "\n"
       << "h_max = " << fmt17(cfg.drag_h_max) << "\n"
       << "points = " << cfg.drag_points << "\n"
       << "[sweep]\n"
       << "kind = " << (cfg.sweep_kind == SweepKind::Simulate ? "simulate" : "drag") << "\n";
    for (auto axis : kSweepAxes) {
        const auto it = cfg.sweep_axes.find(std::string(axis));
        if (it == cfg.sweep_axes.end()) {
            continue;
        }
        os << axis << " =";
        for (std::size_t i = 0; i < it->second.size(); ++i) {
            os << (i ? ", " : " ") << fmt17(it->second[i]);
        }
        os << "\n";
    }
    return os.str();
}

/// 64-bit FNV-1a of the canonical text, as 16 hex digits.
[[nodiscard]] inline std::string config_hash(const RunConfig& cfg)
{
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char ch : canonical_text(cfg)) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace twosphere::cli
