// nonherm - command-line front end.
//
//   nonherm run   (--scenario NAME | --config FILE) [--out FILE] [--steps N] [--format csv|json]
//   nonherm list  [--json]
//   nonherm sweep (--scenario NAME | --config FILE) --param NAME --values V1,V2,... [--steps N]
//                 [--out FILE] [--format csv|json]
//   nonherm check [--filter PATTERN]
//
// Exit codes: 0 success, 1 invariant failure (check), 2 usage or config
// error, 3 numerical failure.

#include "nonherm/nonherm.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>

namespace {

using namespace nonherm;

constexpr int exit_ok = 0;
constexpr int exit_check_failed = 1;
constexpr int exit_config = 2;
constexpr int exit_numerical = 3;

struct Source {
    std::string scenario;
    std::string config;
    std::size_t steps = 0;
};

ScenarioConfig resolve(const Source& src) {
    ScenarioConfig cfg;
    if (!src.config.empty()) {
        cfg = load_config(src.config);
    } else {
        auto b = find_builtin(src.scenario);
        if (!b) throw Error(ErrorCode::config_error, "resolve", "unknown scenario '" + src.scenario + "'");
        cfg = *b;
    }
    if (src.steps) cfg.steps = src.steps;
    validate(cfg);
    return cfg;
}

// Writes to --out when given, stdout otherwise.
template <class Emit>
void emit(const std::string& out_path, Emit body) {
    if (out_path.empty()) {
        body(std::cout);
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw Error(ErrorCode::config_error, "emit", "cannot open '" + out_path + "' for writing");
    body(out);
}

int report(const Error& e) {
    std::cerr << "nonherm: " << e.what() << '\n';
    return e.is_numerical() ? exit_numerical : exit_config;
}

int cmd_run(const Source& src, const std::string& out_path, const std::string& format) {
    const ScenarioConfig cfg = resolve(src);
    log(LogLevel::info, "running " + cfg.name + " with " + std::to_string(cfg.steps) + " steps");
    const ScenarioResult result = run_scenario(cfg);
    for (const auto& d : result.diagnostics) log(LogLevel::warn, cfg.name + ": " + d);
    const OutputTable table = make_output_table(result);
    emit(out_path, [&](std::ostream& os) {
        if (format == "json") {
            os << to_json(result, table).dump(1) << '\n';
        } else {
            write_csv(os, table);
        }
    });
    std::ostringstream summary;
    summary << cfg.name << ": false_inversion=" << result.artifacts.false_inversion
            << " false_adiabaticity=" << result.artifacts.false_adiabaticity;
    if (result.flip) summary << " flip=" << to_string(*result.flip);
    log(LogLevel::info, summary.str());
    return exit_ok;
}

int cmd_list(bool json) {
    const auto all = builtin_scenarios();
    if (json) {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& c : all) j.push_back(scenario_json(c));
        std::cout << j.dump(1) << '\n';
        return exit_ok;
    }
    for (const auto& c : all) {
        std::cout << c.name << ": " << c.description << " [";
        bool first = true;
        for (const auto& [k, v] : c.parameters) {
            std::cout << (first ? "" : ", ") << k << "=" << v;
            first = false;
        }
        std::cout << "; initial=" << to_string(c.initial) << "]\n";
    }
    return exit_ok;
}

int cmd_sweep(const Source& src, const std::string& parameter, const std::vector<double>& values,
              const std::string& out_path, const std::string& format) {
    const ScenarioConfig cfg = resolve(src);
    const auto rows = sweep(cfg, parameter, values);
    emit(out_path, [&](std::ostream& os) {
        if (format == "json") {
            os << sweep_json(cfg.name, parameter, rows).dump(1) << '\n';
            return;
        }
        os << parameter
           << ",ok,false_inversion,false_adiabaticity,final_ratio_c21,final_ratio_d21,final_norm_sq,flip,error\n";
        for (const auto& r : rows) {
            os << format_number(r.value) << ',' << r.ok << ',' << r.false_inversion << ',' << r.false_adiabaticity
               << ',' << format_number(r.ok ? r.final_ratio_c21 : std::nan(""))
               << ',' << format_number(r.ok ? r.final_ratio_d21 : std::nan(""))
               << ',' << format_number(r.ok ? r.final_norm_sq : std::nan(""))
               << ',' << (r.flip ? to_string(*r.flip) : "") << ',';
            std::string err = r.error;
            std::replace(err.begin(), err.end(), ',', ';');
            os << err << '\n';
        }
    });
    for (const auto& r : rows) {
        if (!r.ok) log(LogLevel::warn, parameter + "=" + format_number(r.value) + ": " + r.error);
    }
    return exit_ok;
}

int cmd_check(const std::string& filter) {
    CheckOptions opt;
    opt.filter = filter;
    const auto results = run_checks(opt);
    if (results.empty()) {
        std::cerr << "nonherm: no check matches '" << filter << "'\n";
        return exit_config;
    }
    bool all = true;
    for (const auto& r : results) {
        all = all && r.passed;
        std::cout << (r.passed ? "PASS " : "FAIL ") << std::left << std::setw(22) << r.name << ' '
                  << std::setprecision(3) << r.value << "  (" << r.detail << ")\n";
    }
    return all ? exit_ok : exit_check_failed;
}

void add_source(CLI::App* cmd, Source& src) {
    auto* scen = cmd->add_option("--scenario", src.scenario, "builtin scenario name (see `list`)");
    auto* conf = cmd->add_option("--config", src.config, "scenario configuration file");
    scen->excludes(conf);
    conf->excludes(scen);
    cmd->add_option("--steps", src.steps, "propagation steps (>= 1000)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Non-Hermitian two-level propagation and instantaneous populations"};
    app.require_subcommand(1);

    Source src;
    std::string out_path;
    std::string format = "csv";
    bool list_json = false;
    std::string filter;
    std::string parameter;
    std::vector<double> values;

    auto* run = app.add_subcommand("run", "run one scenario and write its trajectory");
    add_source(run, src);
    run->add_option("--out", out_path, "output file (default stdout)");
    run->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

    auto* list = app.add_subcommand("list", "list builtin scenarios");
    list->add_flag("--json", list_json, "machine-readable listing");

    auto* sw = app.add_subcommand("sweep", "run a scenario for several values of one parameter");
    add_source(sw, src);
    sw->add_option("--param", parameter, "parameter name (w0, delta0, sigma, gamma, phi, T, steps)")->required();
    sw->add_option("--values", values, "comma-separated values")->delimiter(',');
    sw->add_option("--out", out_path, "output file (default stdout)");
    sw->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

    auto* check = app.add_subcommand("check", "run the invariant suite");
    check->add_option("--filter", filter, "only checks whose name contains PATTERN");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "nonherm: " << e.what() << "\n\n";
        const CLI::App* failing = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        std::cerr << failing->help();
        return exit_config;
    }

    try {
        if (*run || *sw) {
            if (src.scenario.empty() == src.config.empty()) {
                std::cerr << "nonherm: exactly one of --scenario or --config is required\n";
                return exit_config;
            }
        }
        if (*run) return cmd_run(src, out_path, format);
        if (*list) return cmd_list(list_json);
        if (*sw) return cmd_sweep(src, parameter, values, out_path, format);
        if (*check) return cmd_check(filter);
    } catch (const Error& e) {
        return report(e);
    } catch (const std::exception& e) {
        std::cerr << "nonherm: " << e.what() << '\n';
        return exit_numerical;
    }
    return exit_config;
}
