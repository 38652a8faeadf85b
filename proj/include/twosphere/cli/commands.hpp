/// @file commands.hpp
/// @brief The `drag`, `simulate`, `sweep` and `validate` subcommands.
///
/// Each command writes its files into the output directory ("-" sends the
/// main CSV to the output stream instead) and returns a process exit code.
#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "twosphere/cli/config.hpp"
#include "twosphere/drag.hpp"
#include "twosphere/dynamics.hpp"
#include "twosphere/validation.hpp"
#include "twosphere/version.hpp"

namespace twosphere::cli {

enum ExitCode : int { kOk = 0, kValidationFailure = 1, kConfigError = 2, kNumericalFailure = 3 };

struct CommandContext {
    std::ostream& out = std::cout;
    std::ostream& err = std::cerr;
    bool allow_partial = false;
    double gegenbauer_scale = 1.0;
};

namespace detail {

inline std::string csv_safe(std::string s)
{
    for (auto& ch : s) {
        if (ch == ',' || ch == '\n' || ch == '\r') {
            ch = ';';
        }
    }
    return s;
}

/// Opens `out_dir/name`, or returns nullptr when out_dir is "-".
inline std::unique_ptr<std::ofstream> open_output(const std::string& out_dir, const std::string& name)
{
    if (out_dir == "-") {
        return nullptr;
    }
    std::filesystem::create_directories(out_dir);
    auto f = std::make_unique<std::ofstream>(std::filesystem::path(out_dir) / name, std::ios::binary);
    if (!*f) {
        throw ConfigError("output.dir", 0, "cannot write '" + (std::filesystem::path(out_dir) / name).string() + "'");
    }
    return f;
}

inline std::vector<double> log_grid(double lo, double hi, int n)
{
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        v[i] = n == 1 ? lo : std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (n - 1));
    }
    if (n > 1) {
        v.front() = lo;
        v.back() = hi;
    }
    return v;
}

inline int thread_count()
{
    if (const char* env = std::getenv("TWOSPHERE_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) {
            return n;
        }
    }
    return static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
}

} // namespace detail

/// Table of (h, kappa_pass, kappa_prop, provenance) on a log-spaced h grid.
inline int cmd_drag(const RunConfig& cfg, CommandContext& ctx)
{
    const DragModel model(cfg.truncation);
    const auto& s = cfg.scenario;
    std::ostringstream csv;
    csv << "h,kappa_pass,kappa_prop,provenance\n";
    for (double h : detail::log_grid(cfg.drag_h_min, cfg.drag_h_max, cfg.drag_points)) {
        const auto c = model.coefficients(h, s.lambda, s.bc);
        csv << fmt17(h) << ',' << fmt17(c.kappa_pass) << ',' << fmt17(c.kappa_prop) << ','
            << to_string(c.provenance) << '\n';
    }
    if (auto f = detail::open_output(cfg.out_dir, "drag.csv")) {
        *f << csv.str();
        ctx.out << "wrote " << (std::filesystem::path(cfg.out_dir) / "drag.csv").string() << "\n";
    } else {
        ctx.out << csv.str();
    }
    return kOk;
}

struct SimulationSummary {
    Trajectory trajectory;
    std::optional<LowerBoundFit> fit;
    std::size_t asymptotic_points = 0;
};

inline SimulationSummary run_simulation(const RunConfig& cfg, const DragModel& model)
{
    SimulationSummary out{simulate(cfg.scenario, cfg.integrator, model)};
    const auto& s = cfg.scenario;
    if (s.bc.kind == BcKind::NoSlip && out.trajectory.termination != Termination::Collision) {
        out.fit = noslip_lower_bound_fit(out.trajectory);
    }
    for (const auto& p : out.trajectory.points) {
        const bool exact = s.passive() ? model.pass_with_provenance(p.h, s.bc).second == Provenance::ExactSeries
                                       : model.coefficients(p.h, s.lambda, s.bc).provenance == Provenance::ExactSeries;
        out.asymptotic_points += exact ? 0 : 1;
    }
    return out;
}

/// Trajectory CSV plus a key = value run report.
inline int cmd_simulate(const RunConfig& cfg, CommandContext& ctx)
{
    const auto t0 = std::chrono::steady_clock::now();
    const DragModel model(cfg.truncation);
    const auto sum = run_simulation(cfg, model);
    const auto& tr = sum.trajectory;
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::ostringstream csv;
    csv << "t,h,hdot,kappa_pass,kappa_prop\n";
    for (const auto& p : tr.points) {
        csv << fmt17(p.t) << ',' << fmt17(p.h) << ',' << fmt17(p.hdot) << ',' << fmt17(p.kappa_pass) << ','
            << fmt17(p.kappa_prop) << '\n';
    }

    std::ostringstream rep;
    rep << "version = " << kVersion << "\n"
        << "command = simulate\n"
        << "termination = " << to_string(tr.termination) << "\n"
        << "t_coll = " << (tr.t_coll ? fmt17(*tr.t_coll) : "none") << "\n"
        << "t_end = " << fmt17(tr.points.back().t) << "\n"
        << "min_h = " << fmt17(tr.min_h()) << "\n"
        << "h_floor = " << fmt17(tr.h_floor) << "\n"
        << "points = " << tr.points.size() << "\n";
    if (sum.fit) {
        rep << "fit_ok = " << (sum.fit->ok ? "true" : "false") << "\n"
            << "fit_C1 = " << fmt17(sum.fit->C1) << "\n"
            << "fit_C2 = " << fmt17(sum.fit->C2) << "\n"
            << "fit_residual = " << fmt17(sum.fit->fit_residual) << "\n"
            << "lower_bound_holds = " << (sum.fit->holds ? "true" : "false") << "\n"
            << "fit_message = " << sum.fit->message << "\n";
        if (cfg.scenario.passive()) {
            rep << "decay_rate_per_unit_force = " << fmt17(sum.fit->C2 / cfg.f_ext) << "\n";
        }
    }
    rep << "provenance = "
        << to_string(sum.asymptotic_points ? Provenance::AsymptoticModel : Provenance::ExactSeries) << "\n"
        << "asymptotic_points = " << sum.asymptotic_points << "\n"
        << "wall_time_s = " << fmt17(wall) << "\n"
        << "config_hash = " << config_hash(cfg) << "\n"
        << "[config]\n"
        << canonical_text(cfg);

    if (auto f = detail::open_output(cfg.out_dir, "trajectory.csv")) {
        *f << csv.str();
        auto r = detail::open_output(cfg.out_dir, "report.txt");
        *r << rep.str();
    } else {
        ctx.out << csv.str();
    }
    ctx.out << rep.str();
    return kOk;
}

struct SweepRow {
    std::map<std::string, double> axes;
    bool ok = false;
    double kappa_pass = 0.0;
    double kappa_prop = 0.0;
    std::string termination;
    std::optional<double> t_coll;
    double min_h = 0.0;
    std::string message;
};

/// Every grid point of the sweep axes, first axis slowest.
inline std::vector<RunConfig> sweep_grid(const RunConfig& cfg)
{
    std::vector<std::pair<std::string, std::vector<double>>> axes;
    for (auto name : kSweepAxes) {
        if (const auto it = cfg.sweep_axes.find(std::string(name)); it != cfg.sweep_axes.end()) {
            if (it->second.empty()) {
                throw ConfigError("sweep." + it->first, cfg.line_of("sweep." + it->first), "sweep axis is empty");
            }
            axes.emplace_back(it->first, it->second);
        }
    }
    if (axes.empty()) {
        throw ConfigError("sweep", 0, "no sweep axes given (lambda, beta, h0, s0, f_p, m)");
    }
    std::vector<RunConfig> grid{cfg};
    for (const auto& [name, values] : axes) {
        std::vector<RunConfig> next;
        for (const auto& base : grid) {
            for (double v : values) {
                RunConfig c = base;
                auto& s = c.scenario;
                if (name == "lambda") {
                    s.lambda = v;
                } else if (name == "beta") {
                    s.bc = v == 0.0 ? BoundaryCondition::no_slip() : BoundaryCondition{BcKind::Navier, v};
                } else if (name == "h0") {
                    s.h0 = v;
                } else if (name == "s0") {
                    s.s0 = v;
                } else if (name == "f_p") {
                    s.f_p = v;
                } else {
                    s.m = v;
                }
                next.push_back(std::move(c));
            }
        }
        grid = std::move(next);
    }
    return grid;
}

inline SweepRow sweep_point(RunConfig c, SweepKind kind, const DragModel& model)
{
    SweepRow row;
    const auto& s = c.scenario;
    row.axes = {{"lambda", s.lambda}, {"beta", s.bc.beta}, {"h0", s.h0},
                {"s0", s.s0},         {"f_p", s.f_p},       {"m", s.m}};
    try {
        resolve(c);
        row.kappa_pass = model.kappa_pass(s.h0, s.bc);
        row.kappa_prop = model.kappa_prop(s.h0, s.lambda, s.bc);
        if (kind == SweepKind::Simulate) {
            const auto tr = simulate(c.scenario, c.integrator, model);
            row.termination = to_string(tr.termination);
            row.t_coll = tr.t_coll;
            row.min_h = tr.min_h();
        }
        row.ok = true;
    } catch (const std::exception& e) {
        row.message = e.what();
    }
    return row;
}

/// Long-format CSV with one row per grid point, evaluated on a worker pool
/// and merged by grid index.
inline int cmd_sweep(const RunConfig& cfg, CommandContext& ctx)
{
    const auto grid = sweep_grid(cfg);
    const DragModel model(cfg.truncation);
    std::vector<SweepRow> rows(grid.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < grid.size(); i = next++) {
            rows[i] = sweep_point(grid[i], cfg.sweep_kind, model);
        }
    };
    const int n_threads = std::min<int>(detail::thread_count(), static_cast<int>(grid.size()));
    std::vector<std::thread> pool;
    for (int t = 1; t < n_threads; ++t) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& th : pool) {
        th.join();
    }

    std::ostringstream csv;
    csv << "index";
    for (auto a : kSweepAxes) {
        csv << ',' << a;
    }
    csv << ",status,kappa_pass,kappa_prop,termination,t_coll,t_coll_times_beta,min_h,message\n";
    std::size_t ok = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        ok += r.ok ? 1 : 0;
        csv << i;
        for (auto a : kSweepAxes) {
            csv << ',' << fmt17(r.axes.at(std::string(a)));
        }
        csv << ',' << (r.ok ? "ok" : "failed") << ',' << (r.ok ? fmt17(r.kappa_pass) : "") << ','
            << (r.ok ? fmt17(r.kappa_prop) : "") << ',' << r.termination << ','
            << (r.t_coll ? fmt17(*r.t_coll) : "") << ','
            << (r.t_coll ? fmt17(*r.t_coll * r.axes.at("beta")) : "") << ','
            << (r.ok && !r.termination.empty() ? fmt17(r.min_h) : "") << ',' << detail::csv_safe(r.message) << '\n';
    }
    if (auto f = detail::open_output(cfg.out_dir, "sweep.csv")) {
        *f << csv.str();
        ctx.out << "wrote " << (std::filesystem::path(cfg.out_dir) / "sweep.csv").string() << "\n";
    } else {
        ctx.out << csv.str();
    }
    ctx.out << "rows = " << rows.size() << ", ok = " << ok << ", failed = " << rows.size() - ok << "\n";
    if (ok == rows.size()) {
        return kOk;
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!rows[i].ok) {
            ctx.err << "row " << i << " failed: " << rows[i].message << "\n";
        }
    }
    return ctx.allow_partial && ok > 0 ? kOk : kNumericalFailure;
}

/// Runs the invariant suite; exit 1 on any failure.
inline int cmd_validate(CommandContext& ctx)
{
    ValidationOptions opt;
    opt.gegenbauer_scale = ctx.gegenbauer_scale;
    if (opt.gegenbauer_scale != 1.0) {
        ctx.out << "fault injection: angular kernel scaled by " << fmt17(opt.gegenbauer_scale) << "\n";
    }
    std::size_t failed = 0;
    const auto results = run_validation_suite(opt, [&](const CheckResult& r) {
        char secs[32];
        std::snprintf(secs, sizeof secs, "%.2fs", r.seconds);
        ctx.out << (r.passed ? "PASS " : "FAIL ") << r.name << " (" << secs << ") " << r.detail << "\n"
                << std::flush;
        failed += r.passed ? 0 : 1;
    });
    ctx.out << results.size() - failed << "/" << results.size() << " checks passed\n";
    return failed ? kValidationFailure : kOk;
}

} // namespace twosphere::cli
