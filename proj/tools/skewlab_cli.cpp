#include "skewlab/cli_reporting.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

int run(const std::optional<std::string>& config_path, const std::vector<std::string>& settings,
        const std::vector<std::pair<std::string, std::optional<std::string>>>& flags) {
    using namespace skewlab;
    ExperimentConfig cfg;
    if (config_path) cfg = load_config_file(*config_path, cfg);
    for (const auto& s : settings) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw UsageError(s, "--set expects key=value");
        apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
    }
    for (const auto& [key, value] : flags)
        if (value) apply_setting(cfg, key, *value);
    if (cfg.out_dir.empty()) cfg.out_dir = default_output_dir();
    validate_config(cfg);

    const ReportBundle bundle = run_experiment(cfg);
    for (const auto& r : bundle.reports) {
        const char* tag = r.status == ReportStatus::hypothesis_not_met ? "HYPOTHESIS-NOT-MET" : (r.pass ? "PASS" : "FAIL");
        std::cout << tag << "  " << r.suite << "  statistic=" << r.statistic << " threshold=" << r.threshold
                  << "  (" << r.n_paths << " paths, " << r.n_steps << " steps)\n";
    }
    const auto path = emit_report(bundle, cfg.format, cfg.out_dir);
    std::cout << "report: " << path.string() << "\n";
    return exit_code(bundle);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo lab for skew Brownian motion and signed-measure calculus checks"};
    app.require_subcommand(1);

    auto* run_cmd = app.add_subcommand("run", "run the suites selected by the configuration");
    std::optional<std::string> config_path, suite, seed, paths, steps, alpha, out, format;
    std::vector<std::string> settings;
    run_cmd->add_option("--config", config_path, "key=value configuration file");
    run_cmd->add_option("--suite", suite, "suite selector");
    run_cmd->add_option("--seed", seed, "master seed");
    run_cmd->add_option("--paths", paths, "number of Monte Carlo paths");
    run_cmd->add_option("--steps", steps, "comma-separated mesh levels");
    run_cmd->add_option("--alpha", alpha, "skewness parameter");
    run_cmd->add_option("--out", out, "output directory (default $SKEWLAB_OUT_DIR or skewlab_out)");
    run_cmd->add_option("--format", format, "json or csv");
    run_cmd->add_option("--set", settings, "extra key=value setting (repeatable)");

    app.add_subcommand("list-suites", "list suite selectors");

    auto* describe_cmd = app.add_subcommand("describe", "describe one suite");
    std::string describe_name;
    describe_cmd->add_option("suite", describe_name, "suite name")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (run_cmd->parsed()) {
            return run(config_path, settings,
                       {{"suite", suite},
                        {"seed", seed},
                        {"paths", paths},
                        {"steps", steps},
                        {"alpha", alpha},
                        {"out", out},
                        {"format", format}});
        }
        if (app.got_subcommand("list-suites")) {
            for (const auto& s : skewlab::list_suites()) std::cout << s.name << "\t" << s.summary << "\n";
            return 0;
        }
        std::cout << skewlab::describe_suite(describe_name) << "\n";
        return 0;
    } catch (const skewlab::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const skewlab::IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
