#pragma once

#include "skewlab/excursion.hpp"
#include "skewlab/grid_paths.hpp"
#include "skewlab/localtime_calculus.hpp"
#include "skewlab/stats.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace skewlab {

class InsufficientSamples : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class HypothesisNotMet : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ModelFamily { trivial, shifted_brownian, custom };

const char* to_string(ModelFamily f);
ModelFamily parse_model_family(const std::string& s);

// Density process D of Q = D_T . P on a finite horizon (D_infinity = D_T).
struct SignedMeasureModel {
    ModelFamily family = ModelFamily::trivial;
    SamplePath d_path;
    double d_infinity = 1.0;
    ExcursionSet excursions;  // of d_path; zero_mask is the exact-zero H mask
    ZeroMask h_mask;          // exact zeros of D
    ZeroMask h_set;           // discrete zero set of D (exact zeros and sign changes)
    LastZeroCurve gamma;
    std::size_t gbar = 0;
};

// trivial: D = 1. shifted_brownian: D = 1 + B with B from seed.child("density").
SignedMeasureModel build_model(ModelFamily family, GridPtr grid, const SeedSpec& seed);
SignedMeasureModel model_from_density(SamplePath d_path);

// M = m + v. zero_reference, when set, is the path whose zeros are the zeros of
// `total` (e.g. W for |W|).
struct Decomposition {
    SamplePath total;
    SamplePath martingale_part;
    SamplePath fv_part;
    std::string label;
    std::optional<SamplePath> zero_reference;
};

Decomposition make_decomposition(SamplePath martingale_part, SamplePath fv_part, std::string label);

enum class ReportStatus { pass, fail, hypothesis_not_met };

const char* to_string(ReportStatus s);

struct TestReport {
    std::string suite;
    double statistic = 0.0;
    double threshold = 0.0;
    std::size_t n_paths = 0;
    std::size_t n_steps = 0;
    SeedSpec seed;
    bool pass = false;
    std::string detail;
    ReportStatus status = ReportStatus::fail;
};

void set_verdict(TestReport& r, bool pass);

// R_t = ito_sum(D, v)_t + [M, D]_t.
ResidualReport qp_residual(const Decomposition& dec, const SignedMeasureModel& model);

// statistic = TV of fv on steps touching the mask dilated by `dilation` / TV of fv.
// Pass iff statistic >= 1 - tol (zero total variation passes).
TestReport carried_by_check(const SamplePath& fv, const ZeroMask& mask, double tol, std::size_t dilation = 2);

struct DriftOptions {
    std::vector<double> checkpoints{0.25, 0.5, 0.75, 1.0};
    double threshold = 4.0;
    std::size_t min_paths = 1000;
};

// Collects P at the checkpoints (and at half of each checkpoint) path by path.
// For every pair s < t of checkpoints and every weight w in {1, sgn(P_{s/2}),
// 1{P_s > median P_s}} the statistic is |mean(w (P_t - P_s))| / standard error.
class DriftAccumulator {
public:
    DriftAccumulator(GridPtr grid, DriftOptions opts);
    void add(const SamplePath& p);
    std::size_t count() const { return n_; }
    TestReport report(const std::string& suite, const SeedSpec& seed) const;

private:
    GridPtr grid_;
    DriftOptions opts_;
    std::vector<std::size_t> cp_index_;
    std::vector<std::size_t> half_index_;
    std::vector<double> values_;  // row-major: path x (checkpoints, halves)
    std::size_t n_ = 0;
};

using PathGenerator = std::function<SamplePath(std::size_t path_index)>;

TestReport martingale_drift_test(const PathGenerator& generator, std::size_t n_paths,
                                 const DriftOptions& opts = {}, const SeedSpec& seed = {});

struct SigmaOptions {
    double carried_tol = 0.05;
    std::size_t dilation = 2;
    double qp_tol = 0.05;
};

// X = M + A with dec.martingale_part = M and dec.fv_part = A. Checks A carried by
// {X = 0} u H, |qp residual of M| below qp_tol at the horizon, and A_0 = M_0 = 0.
TestReport sigma_h_check(const Decomposition& dec, const SignedMeasureModel& model,
                         const SigmaOptions& opts = {});

// Named (Q,P)-process instances built from an independent Brownian W (seed.child("W")):
//  brownian                  W
//  brownian_plus_local_time  W + 2 L(D)
//  abs_brownian              |W| = int sgn(W) dW + L(W)
//  drifted                   W + t                  (negative control)
//  exp_martingale            -exp(W - t/2)          (never zero)
//  exp_drift                 -exp(W)                (negative control, never zero)
//  relative                  W - W_gamma, gamma from D
//  density                   D itself               (negative control, zeros = H)
// Local times are the tanaka estimator.
Decomposition make_instance(const std::string& name, const SignedMeasureModel& model, const SeedSpec& seed);
SamplePath instance_driver(const SignedMeasureModel& model, const SeedSpec& seed);
std::vector<std::string> instance_names();

// Derived decompositions.
Decomposition abs_decomposition(const Decomposition& dec);
Decomposition zalpha_decomposition(const Decomposition& dec, double alpha, const SeedSpec& seed);
Decomposition ito_xdx_decomposition(const Decomposition& dec);

// Zero set of dec.total, honouring dec.zero_reference.
ZeroMask zero_set_of(const Decomposition& dec);

struct EquivalenceOptions {
    std::size_t n_steps = 1024;
    std::size_t n_paths = 10000;
    double horizon = 1.0;
    double alpha = 0.5;
    bool enforce_hypotheses = true;
    std::size_t hypothesis_dilation = 2;
    double qp_tol = 0.05;
    double qv_rel_tol = 0.03;
    DriftOptions drift;
    SigmaOptions sigma;
    double ks_level = 0.01;
};

struct EquivalenceResult {
    TestReport left;
    TestReport right;
    TestReport summary;
};

std::vector<std::string> equivalence_suite_names();

EquivalenceResult equivalence_suite(const std::string& name, ModelFamily family, const std::string& instance,
                                    const SeedSpec& seed, const EquivalenceOptions& opts = {});

struct RepresentationSample {
    Decomposition dec;
    SignedMeasureModel model;
    SamplePath driver;
};

using RepresentationGenerator = std::function<RepresentationSample(std::size_t path_index)>;

struct StoppingRule {
    enum class Kind { deterministic, first_hitting };
    Kind kind = Kind::deterministic;
    double time = 1.0;   // deterministic time, or cap for first hitting
    double level = 1.0;  // first index with |M_t - M_0| >= level
    std::size_t index(const RepresentationSample& s) const;
    std::string describe() const;
};

struct EventRule {
    std::string name;
    std::function<bool(const RepresentationSample&, std::size_t t_index)> indicator;
};

std::vector<EventRule> default_events();

// q_weighted compares E[D_T (M_T - M_{gamma_T}) 1_A] with E[D_inf M_inf 1{gbar<T} 1_A].
// p_plain drops both density weights.
enum class RepresentationWeighting { q_weighted, p_plain };

TestReport optional_representation_check(const RepresentationGenerator& generator, const StoppingRule& stopping,
                                         const std::vector<EventRule>& events, std::size_t n_paths,
                                         RepresentationWeighting weighting = RepresentationWeighting::q_weighted,
                                         double threshold = 4.0, const SeedSpec& seed = {});

// Generator for the named instance under the given model family.
RepresentationGenerator representation_generator(ModelFamily family, const std::string& instance, GridPtr grid,
                                                 const SeedSpec& seed);

}  // namespace skewlab
