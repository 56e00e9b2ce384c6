#pragma once

#include "skewlab/grid_paths.hpp"
#include "skewlab/localtime_calculus.hpp"
#include "skewlab/signed_measure.hpp"
#include "skewlab/signflip.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace skewlab {

inline constexpr const char* kVersion = "0.1.0";

class UsageError : public std::runtime_error {
public:
    UsageError(std::string key, const std::string& message)
        : std::runtime_error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ReportFormat { json, csv };

ReportFormat parse_format(const std::string& s);

// Flat dotted-key configuration. Keys:
//   suite, model, instance, alpha, schedule.boundaries, schedule.values, schedule.rule,
//   variant, paths, steps, seeds, repetitions, reference_steps, horizon, seed, out, format,
//   tol.<name> (see tolerance_names()).
struct ExperimentConfig {
    std::string suite = "skew_law";
    std::optional<ModelFamily> model;
    std::optional<std::string> instance;
    double alpha = 0.5;
    std::optional<std::vector<double>> schedule_boundaries;
    std::optional<std::vector<double>> schedule_values;
    SignRule rule = SignRule::hold_from_start;
    SignMode variant = SignMode::absolute;
    std::size_t n_paths = 10000;
    // Unset means the per-suite default (see describe_suite).
    std::optional<std::vector<std::size_t>> n_steps;
    std::size_t n_seeds = 32;
    std::size_t repetitions = 1;
    std::size_t reference_steps = 1u << 20;
    double horizon = 1.0;
    std::uint64_t seed = 1;
    std::string out_dir;
    ReportFormat format = ReportFormat::json;
    std::map<std::string, double> tolerances;

    AlphaSchedule schedule() const;
    double tolerance(const std::string& name) const;
    std::vector<std::size_t> steps_or(std::vector<std::size_t> fallback) const;
};

std::vector<std::pair<std::string, double>> tolerance_names();

// Sets one key; throws UsageError carrying the key on unknown keys or bad values.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);

// key=value lines; '#' starts a comment; blank lines ignored.
ExperimentConfig parse_config_text(const std::string& text, ExperimentConfig base = {});
ExperimentConfig load_config_file(const std::filesystem::path& path, ExperimentConfig base = {});

void validate_config(const ExperimentConfig& cfg);

// Canonical key=value listing of every setting, in a fixed order.
std::vector<std::pair<std::string, std::string>> config_echo(const ExperimentConfig& cfg);

// Default output directory: $SKEWLAB_OUT_DIR, else "skewlab_out".
std::string default_output_dir();

struct CurveSeries {
    std::string series;
    std::vector<double> t;
    std::vector<double> value;
};

// Plot-ready data written as <name>.csv with header t,value,series.
struct CurveFile {
    std::string name;
    std::vector<CurveSeries> series;
};

struct Provenance {
    std::vector<std::pair<std::string, std::string>> config;
    std::string master_seed;
    std::string version = kVersion;
    std::string timestamp;
};

struct ReportBundle {
    Provenance provenance;
    std::vector<TestReport> reports;
    std::vector<ResidualReport> residuals;
    std::vector<CurveFile> curves;
};

struct SuiteInfo {
    std::string name;
    std::string summary;
};

std::vector<SuiteInfo> list_suites();
std::string describe_suite(const std::string& name);

struct EquivalenceCase {
    std::string suite;
    ModelFamily family;
    std::string instance;
    bool positive;  // expected pass/pass, else fail/fail
};

std::vector<EquivalenceCase> equivalence_cases();

ReportBundle run_experiment(const ExperimentConfig& cfg);

// Per-level mesh reports: level 0 has threshold +inf, level j > 0 has the median of
// level j - 1, and the finest level additionally min(., tol).
std::vector<TestReport> mesh_reports(const std::string& suite, const MeshStudy& study, double tol,
                                     const SeedSpec& seed);

std::string render_json(const ReportBundle& bundle);
std::string render_csv(const ReportBundle& bundle);
std::string render_curve_csv(const CurveFile& curve);

// Writes report.json or report.csv plus one CSV per curve into the directory.
// Returns the path of the main report.
std::filesystem::path emit_report(const ReportBundle& bundle, ReportFormat format,
                                  const std::filesystem::path& destination);

ReportBundle parse_report_json(const std::string& text);
SeedSpec parse_seed(const std::string& s);

// 0 all pass, 3 failures are all hypothesis-not-met, 1 otherwise.
int exit_code(const ReportBundle& bundle);

}  // namespace skewlab
