#pragma once

#include "skewlab/excursion.hpp"
#include "skewlab/grid_paths.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace skewlab {

// output[0] = 0, output[j] = sum_{i<j} integrand[i] * (integrator[i+1] - integrator[i]).
// Sequential left-to-right summation.
SamplePath ito_sum(const SamplePath& integrand, const SamplePath& integrator);

// output[j] = sum_{i<j} (x[i+1] - x[i]) * (y[i+1] - y[i]).
SamplePath quadratic_covariation(const SamplePath& x, const SamplePath& y);

// Symmetric sign, sgn(0) = 0.
inline double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }
SamplePath sign_path(const SamplePath& x);
SamplePath abs_path(const SamplePath& x);
SamplePath add_paths(const SamplePath& a, const SamplePath& b, double scale_b = 1.0);
SamplePath scale_path(const SamplePath& a, double c);
SamplePath multiply_paths(const SamplePath& a, const SamplePath& b);
SamplePath map_path(const SamplePath& a, const std::function<double(double, double)>& f);  // f(t, x)

//  occupation: (2 eps)^-1 * sum_{t_i < t} 1{|X_i| <= eps} * dt, default eps = dt^0.4.
//  tanaka:     |X_t| - |X_0| - ito_sum(sgn X, X)_t.
//  bridge:     sum of E[local time over a step | endpoints] for a Brownian bridge,
//              erfc((|a| + |b|) / sqrt(2 dt)) / (2 phi_dt(b - a)).
enum class LocalTimeMethod { occupation, tanaka, bridge };

const char* to_string(LocalTimeMethod m);

struct LocalTimeCurve {
    SamplePath curve;
    LocalTimeMethod estimator = LocalTimeMethod::tanaka;
    double bandwidth = 0.0;
};

double default_bandwidth(const TimeGrid& grid);

LocalTimeCurve local_time(const SamplePath& path, LocalTimeMethod method,
                          std::optional<double> bandwidth = std::nullopt);

struct ResidualReport {
    std::string identity_name;
    double sup_norm = 0.0;
    double terminal = 0.0;
    std::size_t n_steps = 0;
    SeedSpec seed;
    SamplePath curve;
    std::vector<std::pair<std::string, double>> extras;
};

ResidualReport make_residual_report(std::string name, SamplePath curve, const SeedSpec& seed);

enum class IdentityKind { tanaka, balayage_predictable, transform_c3 };

const char* to_string(IdentityKind k);

struct ResidualInputs {
    // tanaka: x. balayage_predictable: y. transform_c3: x = M, m, v.
    const SamplePath* x = nullptr;
    const SamplePath* y = nullptr;
    const SamplePath* m = nullptr;
    const SamplePath* v = nullptr;

    // tanaka: stochastic integral int sgn(X) dX on the same grid. When absent it is
    // ito_sum(sgn X, X). A finer coupled path's integral restricted to this grid
    // goes here for mesh studies.
    const SamplePath* integral = nullptr;
    LocalTimeMethod method = LocalTimeMethod::occupation;
    std::optional<double> bandwidth;

    // balayage: zero set taken from zero_reference (or y itself). k_{gamma_t} is
    // k(t at gamma_t), or k(k_source at gamma_t) when k_source is given.
    const SamplePath* zero_reference = nullptr;
    const SamplePath* k_source = nullptr;
    std::function<double(double)> k;

    // transform_c3: f and its primitive F(x) = int_0^x f.
    std::function<double(double)> f;
    std::function<double(double)> F;

    SeedSpec seed;
};

// Residual curves are accumulated from per-step defects so that identities which
// telescope exactly (constant sign, k = 1) give exactly zero.
//  tanaka:               |X_t| - |X_0| - I_t - L_t
//  balayage_predictable: k_{gamma_t} Y_t - k_{gamma_0} Y_0 - int k_{gamma_s} dY_s
//  transform_c3:         f(v_t) M_t - f(v_0) M_0 - int f(v_s) dm_s - F(v_t)
ResidualReport identity_residual(IdentityKind kind, const ResidualInputs& in);

// Median (over seeds) sup-norm residual at each mesh level, all levels taken from
// one coupled refine_bridge family per seed.
struct MeshStudy {
    std::vector<std::size_t> levels;
    std::vector<double> medians;
    std::vector<std::vector<double>> sup_norms;  // [level][seed]
    std::vector<ResidualReport> first_seed;      // residual of seed 0 at each level
    bool strictly_decreasing() const;
};

struct TanakaStudyOptions {
    std::vector<std::size_t> levels{4096, 16384, 65536};
    std::size_t n_seeds = 32;
    // When nonzero, the stochastic integral int sgn(X) dX is taken from the coupled
    // refinement with this many steps and the local time from the mesh under test.
    std::size_t reference_steps = 1u << 20;
    LocalTimeMethod method = LocalTimeMethod::bridge;
    SeedSpec seed{1, "tanaka", 0};
};

MeshStudy tanaka_mesh_study(const TanakaStudyOptions& opts);

struct BalayageStudyOptions {
    std::vector<std::size_t> levels{4096, 16384, 65536};
    std::size_t n_seeds = 32;
    std::function<double(double)> k = [](double t) { return std::cos(t); };
    SeedSpec seed{1, "balayage", 0};
};

// Y = |B| with the zero set of B, k_{gamma_t} = k(gamma_t).
MeshStudy balayage_mesh_study(const BalayageStudyOptions& opts);

// Coarsest-level Brownian path for seed i, refined to `finest` steps.
SamplePath coupled_brownian(std::size_t coarse_steps, std::size_t finest_steps, const SeedSpec& seed);

}  // namespace skewlab
