#pragma once

#include "skewlab/excursion.hpp"
#include "skewlab/grid_paths.hpp"
#include "skewlab/localtime_calculus.hpp"
#include "skewlab/signed_measure.hpp"
#include "skewlab/signflip.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace skewlab {

struct SkewBuildSpec {
    SignMode variant = SignMode::absolute;
    AlphaSchedule schedule = AlphaSchedule::constant(0.5);
    SignRule rule = SignRule::split;
    Decomposition base;
    // nullptr means the trivial model.
    const SignedMeasureModel* model = nullptr;
    double x0 = 0.0;
    bool enforce_hypotheses = true;
    std::size_t hypothesis_dilation = 2;
    double hypothesis_covariation_tol = 0.05;
};

struct SkewConstruction {
    SamplePath x;
    SamplePath sign;
    ExcursionSet excursions;
    SignAssignment assignment;
};

// decompose_excursions(base) -> assign_signs -> build_sign_path -> apply_sign.
// The signed base is always decomposed (|base| has no sign changes on the grid).
// When x0 != 0 the initial excursion keeps the sign that reproduces x0.
SkewConstruction build_skew_construction(const SkewBuildSpec& spec, const SeedSpec& seed);
SamplePath build_skew(const SkewBuildSpec& spec, const SeedSpec& seed);

// R_t = X_t - x0 - W_t - sum_{t_{i+1} <= t} (2 alpha(t_{i+1}) - 1) dL_i with
//   W = ito_sum(Z sgn(base), base) for the absolute variant, ito_sum(Z, base) for signed,
//   L = local_time(base, tanaka).
// extras: qv_terminal ([W, W]_T), local_time_terminal.
ResidualReport sde_residual(const SamplePath& x_alpha, const Decomposition& base, const SamplePath& sign,
                            const AlphaSchedule& schedule, SignMode variant);

// 2 alpha phi_t(y) for y > 0, 2 (1 - alpha) phi_t(y) for y < 0, phi_t(0) at y = 0.
double skew_transition_density(double alpha, double t, double y);
double skew_cdf(double alpha, double t, double y);

// Skew random walk: from 0 step +1 with probability alpha, elsewhere +-1 with
// probability 1/2; values scaled by 1/sqrt(n) on the grid [0, 1].
SamplePath harrison_shepp_walk(double alpha, std::size_t n_steps, const SeedSpec& seed);

struct LawSample {
    std::vector<double> values;
    std::string tag;
    // Support lattice {lattice_offset + k lattice_spacing}; 0 for continuous samples.
    double lattice_spacing = 0.0;
    double lattice_offset = 0.0;
};

struct LawTestOptions {
    double level = 0.01;
    double lattice_allowance = 0.0;
    std::optional<double> sign_reference;
    double sign_tolerance = 0.01;
    std::size_t min_samples = 1000;
};

// One-sample KS against cdf (midpoint convention on lattice samples), plus the
// sign-probability check when sign_reference is set.
TestReport law_test(const LawSample& sample, const std::function<double(double)>& cdf, const LawTestOptions& opts);

// Two-sample KS. If one sample lives on a lattice the other is rounded onto it.
TestReport law_test(const LawSample& a, const LawSample& b, const LawTestOptions& opts);

double fraction_positive(const std::vector<double>& v);

struct SkewSampleConfig {
    std::vector<AlphaSchedule> schedules;  // share base paths across schedules
    SignMode variant = SignMode::absolute;
    SignRule rule = SignRule::split;
    std::size_t n_paths = 10000;
    std::size_t n_steps = 4096;
    double horizon = 1.0;
    double x0 = 0.0;
    SeedSpec seed;
};

// Terminal values of the construction under the trivial model, base W from
// seed.with_index(i).child("base"), signs from seed.with_index(i).child("skew<k>").
std::vector<LawSample> skew_terminal_samples(const SkewSampleConfig& cfg);

LawSample walk_terminal_sample(double alpha, std::size_t n_steps, std::size_t n_paths, const SeedSpec& seed);

struct SdeStudyOptions {
    std::vector<std::size_t> levels{4096, 16384, 65536};
    std::size_t n_seeds = 32;
    AlphaSchedule schedule = AlphaSchedule::constant(0.7);
    SignRule rule = SignRule::hold_from_start;
    SignMode variant = SignMode::absolute;
    SeedSpec seed{1, "sde", 0};
};

// sde_residual of the construction on coupled refine_bridge bases (trivial model).
// Signs use the same seed at every level.
MeshStudy sde_mesh_study(const SdeStudyOptions& opts);

}  // namespace skewlab
