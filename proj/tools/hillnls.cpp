// Experiment driver: list scenario presets, run one experiment, regenerate
// reports, or sweep several scenarios in parallel.
#include <CLI11.hpp>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <thread>

#include "hillnls/report.hpp"
#include "hillnls/scenario.hpp"

using namespace hillnls;

namespace {

// exit codes: 0 expectations pass, 1 expectations fail, 2 config error
// (nothing written), 3 numerical failure (partial artifacts kept)
constexpr int kExitPass = 0, kExitExpectFail = 1, kExitConfig = 2, kExitNumerical = 3;

fs::path output_root(const std::string& out_flag) {
    if (!out_flag.empty()) return out_flag;
    if (const char* env = std::getenv("HILLNLS_OUT"); env && *env) return env;
    return ".";
}

fs::path fresh_run_dir(const fs::path& root, const ScenarioConfig& cfg) {
    fs::path base = root / "runs" / run_id_for(cfg);
    fs::path dir = base;
    for (int k = 2; fs::exists(dir); ++k) dir = base.string() + "-" + std::to_string(k);
    return dir;
}

struct RunRequest {
    std::string scenario;  // preset name, or empty when driven by --config
    ScenarioConfig config;
    const Expectations* expected = nullptr;
};

RunRequest resolve_request(const std::string& scenario, const std::string& config_path,
                           const std::vector<std::string>& overrides) {
    RunRequest req;
    if (!scenario.empty()) {
        const Scenario* s = find_scenario(scenario);
        if (!s) throw ConfigError("unknown scenario: " + scenario);
        req.scenario = scenario;
        req.config = s->config;
        req.expected = &s->expected;
    }
    if (!config_path.empty()) {
        req.config = parse_config_file(config_path);
        if (scenario.empty()) req.expected = nullptr;
    }
    for (const std::string& o : overrides) apply_override(req.config, o);
    make_sigma(req.config);  // validate the sigma block eagerly
    if (req.config.t_end <= 0.0 || req.config.dt <= 0.0)
        throw ConfigError("time.t_end and time.dt must be positive");
    diagnostic_times(req.config);  // validates r0/samples
    return req;
}

int execute_run(const RunRequest& req, const fs::path& root, bool strict_fp,
                const std::string& format, fs::path* dir_out) {
    RunResult r = run_scenario(req.config, req.expected);
    fs::path dir = fresh_run_dir(root, req.config);
    write_run_artifacts(r, dir, req.scenario.empty() ? "custom" : req.scenario, strict_fp);
    if (dir_out) *dir_out = dir;

    if (format == "json") {
        std::cout << summary_json(r, req.scenario.empty() ? "custom" : req.scenario, strict_fp)
                         .dump(2)
                  << '\n';
    } else {
        std::cout << "run dir: " << dir.string() << '\n';
        if (r.numerical_failure)
            std::cout << "NUMERICAL FAILURE at t = " << r.failure_time
                      << " (partial artifacts kept)\n";
        for (const CheckResult& c : r.checks)
            std::printf("%-26s %s  value = %.6g%s%s\n", c.name.c_str(),
                        c.pass ? "pass" : "FAIL", c.value, c.detail.empty() ? "" : "  ",
                        c.detail.c_str());
        if (r.decay)
            std::printf("decay slopes: vs log t = %.4f, vs log(1+|zeta2|) = %.4f\n",
                        r.decay->vs_log_t.slope, r.decay->vs_log_zeta2.slope);
        if (r.cauchy_linf && !r.cauchy_linf->corrected_converged)
            std::printf("cauchy Linf slopes: corrected = %.4f, uncorrected = %.4f\n",
                        r.cauchy_linf->corrected.slope, r.cauchy_linf->uncorrected.slope);
    }
    if (r.numerical_failure) return kExitNumerical;
    return r.expectations_pass ? kExitPass : kExitExpectFail;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral laboratory for Schroedinger flows with time-dependent "
                 "harmonic potentials"};
    app.require_subcommand(1);

    std::string config_path, out_flag, format = "csv", scenario;
    std::vector<std::string> overrides, sweep_names, report_dirs;
    bool strict_fp = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "config file (TOML subset)");
        cmd->add_option("--set", overrides, "override, e.g. time.dt=5e-4")->take_all();
        cmd->add_option("--out", out_flag, "output root (default $HILLNLS_OUT or .)");
        cmd->add_flag("--strict-fp", strict_fp, "deterministic sequential execution");
        cmd->add_option("--format", format, "console output format")
            ->check(CLI::IsMember({"csv", "json"}));
    };

    CLI::App* list_cmd = app.add_subcommand("list", "list scenario presets");
    list_cmd->add_option("--format", format, "output format")
        ->check(CLI::IsMember({"csv", "json"}));

    CLI::App* run_cmd = app.add_subcommand("run", "run one experiment");
    run_cmd->add_option("scenario", scenario, "preset name (see `list`)");
    add_common(run_cmd);

    CLI::App* report_cmd = app.add_subcommand("report", "summarize finished run dirs");
    report_cmd->add_option("dirs", report_dirs, "run directories")->required();
    report_cmd->add_option("--out", out_flag, "where to write report.txt / comparison.svg");

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "run several presets");
    sweep_cmd->add_option("scenarios", sweep_names, "preset names (default: all)");
    add_common(sweep_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (list_cmd->parsed()) {
            if (format == "json") {
                nlohmann::json j = nlohmann::json::array();
                for (const Scenario& s : scenario_registry()) {
                    nlohmann::json e;
                    e["name"] = s.name;
                    e["description"] = s.description;
                    e["sigma"] = make_sigma(s.config).describe();
                    e["nu"] = s.config.nu;
                    e["mu"] = s.config.mu;
                    e["rho_L"] = s.config.rho_L;
                    e["rho_S"] = s.config.rho_S;
                    e["t_end"] = s.config.t_end;
                    j.push_back(e);
                }
                std::cout << j.dump(2) << '\n';
            } else {
                std::cout << "name,sigma,nu,mu,rho_L,rho_S,t_end,description\n";
                for (const Scenario& s : scenario_registry())
                    std::printf("%s,%s,%g,%g,%g,%g,%g,%s\n", s.name.c_str(),
                                make_sigma(s.config).describe().c_str(), s.config.nu,
                                s.config.mu, s.config.rho_L, s.config.rho_S, s.config.t_end,
                                s.description.c_str());
            }
            return kExitPass;
        }

        if (report_cmd->parsed()) {
            std::vector<fs::path> dirs(report_dirs.begin(), report_dirs.end());
            fs::path out = out_flag.empty() ? (dirs.size() == 1 ? dirs[0] : fs::path("."))
                                            : fs::path(out_flag);
            std::cout << report_runs(dirs, out);
            return kExitPass;
        }

        if (run_cmd->parsed()) {
            if (scenario.empty() && config_path.empty())
                throw ConfigError("run: give a scenario name or --config");
            RunRequest req = resolve_request(scenario, config_path, overrides);
            return execute_run(req, output_root(out_flag), strict_fp, format, nullptr);
        }

        if (sweep_cmd->parsed()) {
            if (sweep_names.empty())
                for (const Scenario& s : scenario_registry()) sweep_names.push_back(s.name);
            // resolve everything up front so a config error writes nothing
            std::vector<RunRequest> reqs;
            for (const std::string& name : sweep_names)
                reqs.push_back(resolve_request(name, config_path, overrides));

            fs::path root = output_root(out_flag);
            std::vector<int> codes(reqs.size(), kExitPass);
            std::vector<fs::path> dirs(reqs.size());
            std::atomic<std::size_t> next{0};
            auto worker = [&]() {
                for (std::size_t i = next.fetch_add(1); i < reqs.size();
                     i = next.fetch_add(1)) {
                    RunResult r = run_scenario(reqs[i].config, reqs[i].expected);
                    dirs[i] = fresh_run_dir(root, reqs[i].config);
                    write_run_artifacts(r, dirs[i], reqs[i].scenario, strict_fp);
                    codes[i] = r.numerical_failure ? kExitNumerical
                               : r.expectations_pass ? kExitPass
                                                     : kExitExpectFail;
                }
            };
            if (strict_fp) {
                worker();
            } else {
                unsigned n = std::min<unsigned>(std::thread::hardware_concurrency(),
                                                unsigned(reqs.size()));
                std::vector<std::thread> pool;
                for (unsigned i = 0; i + 1 < std::max(1u, n); ++i)
                    pool.emplace_back(worker);
                worker();
                for (std::thread& t : pool) t.join();
            }
            int rc = kExitPass;
            for (std::size_t i = 0; i < reqs.size(); ++i) {
                std::printf("%-20s %-7s %s\n", reqs[i].scenario.c_str(),
                            codes[i] == kExitPass         ? "pass"
                            : codes[i] == kExitNumerical ? "NUMFAIL"
                                                          : "FAIL",
                            dirs[i].string().c_str());
                if (codes[i] == kExitNumerical) rc = kExitNumerical;
                else if (codes[i] != kExitPass && rc == kExitPass) rc = kExitExpectFail;
            }
            report_runs(dirs, root / "runs");
            return rc;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitConfig;
}
