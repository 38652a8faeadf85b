// twosphere: drag tables, approach simulations, parameter sweeps and the
// self-validation suite for two head-on swimmers.

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "twosphere/cli/commands.hpp"
#include "twosphere/version.hpp"

namespace {

using namespace twosphere;
using namespace twosphere::cli;

struct CommonFlags {
    std::string config;
    std::string out;
    double tol = 0.0;
    int nmax = 0;
    std::vector<std::string> sets;
};

void add_common(CLI::App* sub, CommonFlags& f)
{
    sub->add_option("--config", f.config, "configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", f.out, "output directory ('-' writes the CSV to stdout)");
    sub->add_option("--tol", f.tol, "integrator relative tolerance (absolute = 1e-3 x relative)");
    sub->add_option("--nmax", f.nmax, "initial number of series modes");
    sub->add_option("--set", f.sets, "override one setting, e.g. --set scenario.h0=0.2");
}

RunConfig build_config(const CommonFlags& f)
{
    RunConfig cfg = f.config.empty() ? RunConfig{} : load_config(f.config);
    for (const auto& s : f.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(s, 0, "--set expects section.key=value");
        }
        apply_setting(cfg, s.substr(0, eq), std::string_view(s).substr(eq + 1), 0);
    }
    if (!f.out.empty()) {
        cfg.out_dir = f.out;
    }
    if (f.tol != 0.0) {
        if (!(f.tol > 0.0 && f.tol < 1.0)) {
            throw ConfigError("--tol", 0, "must lie in (0, 1)");
        }
        cfg.integrator.rtol = f.tol;
        cfg.integrator.atol = 1e-3 * f.tol;
    }
    if (f.nmax != 0) {
        cfg.truncation.n_max = f.nmax;
        cfg.truncation.hard_cap = std::max(cfg.truncation.hard_cap, f.nmax);
    }
    resolve(cfg);
    return cfg;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Hydrodynamic drag and approach dynamics of two head-on swimmers"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    CommonFlags flags;
    bool allow_partial = false;
    std::string fault;
    double h_min = 0.0, h_max = 0.0;
    int points = 0;

    auto* drag = app.add_subcommand("drag", "table of kappa_pass and kappa_prop over a log-spaced gap range");
    add_common(drag, flags);
    drag->add_option("--h-min", h_min, "smallest half-gap");
    drag->add_option("--h-max", h_max, "largest half-gap");
    drag->add_option("--points", points, "number of gaps");

    auto* sim = app.add_subcommand("simulate", "integrate one approach and write trajectory.csv and report.txt");
    add_common(sim, flags);

    auto* sweep = app.add_subcommand("sweep", "evaluate a parameter grid into sweep.csv");
    add_common(sweep, flags);
    sweep->add_flag("--allow-partial", allow_partial, "succeed if at least one grid point succeeded");

    auto* validate = app.add_subcommand("validate", "run the invariant suite");
    validate->add_option("--inject-fault", fault, "test mode: perturb a kernel to check the suite detects it")
        ->check(CLI::IsMember({"gegenbauer"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    CommandContext ctx{std::cout, std::cerr, allow_partial};
    try {
        if (validate->parsed()) {
            ctx.gegenbauer_scale = fault == "gegenbauer" ? 1.01 : 1.0;
            return cmd_validate(ctx);
        }
        if (drag->parsed()) {
            if (h_min != 0.0) {
                flags.sets.push_back("drag.h_min=" + fmt17(h_min));
            }
            if (h_max != 0.0) {
                flags.sets.push_back("drag.h_max=" + fmt17(h_max));
            }
            if (points != 0) {
                flags.sets.push_back("drag.points=" + std::to_string(points));
            }
        }
        const RunConfig cfg = build_config(flags);
        if (drag->parsed()) {
            return cmd_drag(cfg, ctx);
        }
        if (sim->parsed()) {
            return cmd_simulate(cfg, ctx);
        }
        return cmd_sweep(cfg, ctx);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumericalFailure;
    }
}
