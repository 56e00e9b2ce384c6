#include "skewlab/localtime_calculus.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace skewlab {

SamplePath ito_sum(const SamplePath& integrand, const SamplePath& integrator) {
    require_aligned(integrand, integrator, "ito_sum");
    const auto& k = integrand.values;
    const auto& y = integrator.values;
    std::vector<double> out(y.size(), 0.0);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < y.size(); ++i) {
        acc += k[i] * (y[i + 1] - y[i]);
        out[i + 1] = acc;
    }
    return SamplePath{integrator.grid, std::move(out)};
}

SamplePath quadratic_covariation(const SamplePath& x, const SamplePath& y) {
    require_aligned(x, y, "quadratic_covariation");
    std::vector<double> out(x.size(), 0.0);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        acc += (x.values[i + 1] - x.values[i]) * (y.values[i + 1] - y.values[i]);
        out[i + 1] = acc;
    }
    return SamplePath{x.grid, std::move(out)};
}

SamplePath sign_path(const SamplePath& x) {
    std::vector<double> v(x.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = sgn(x.values[i]);
    return SamplePath{x.grid, std::move(v)};
}

SamplePath abs_path(const SamplePath& x) {
    std::vector<double> v(x.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::fabs(x.values[i]);
    return SamplePath{x.grid, std::move(v)};
}

SamplePath add_paths(const SamplePath& a, const SamplePath& b, double scale_b) {
    require_aligned(a, b, "add_paths");
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.values[i] + scale_b * b.values[i];
    return SamplePath{a.grid, std::move(v)};
}

SamplePath scale_path(const SamplePath& a, double c) {
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = c * a.values[i];
    return SamplePath{a.grid, std::move(v)};
}

SamplePath multiply_paths(const SamplePath& a, const SamplePath& b) {
    require_aligned(a, b, "multiply_paths");
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = a.values[i] * b.values[i];
    return SamplePath{a.grid, std::move(v)};
}

SamplePath map_path(const SamplePath& a, const std::function<double(double, double)>& f) {
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(a.grid->times[i], a.values[i]);
    return SamplePath{a.grid, std::move(v)};
}

const char* to_string(LocalTimeMethod m) {
    switch (m) {
        case LocalTimeMethod::occupation: return "occupation";
        case LocalTimeMethod::tanaka: return "tanaka";
        case LocalTimeMethod::bridge: return "bridge";
    }
    return "unknown";
}

double default_bandwidth(const TimeGrid& grid) { return std::pow(grid.dt(), 0.4); }

namespace {

// E[symmetric local time at 0 over a step of length h | X_i = a, X_{i+1} = b]
// for a Brownian bridge.
double bridge_increment(double a, double b, double h) {
    const double z = (std::fabs(a) + std::fabs(b)) / std::sqrt(2.0 * h);
    const double w2 = (b - a) * (b - a) / (2.0 * h);
    const double c = 0.5 * std::sqrt(2.0 * std::numbers::pi * h);
    if (z < 25.0) return c * std::erfc(z) * std::exp(w2);
    // erfc(z) e^{z^2} ~ 1 / (z sqrt(pi)) * (1 - 1 / (2 z^2))
    const double erfcx = (1.0 - 0.5 / (z * z)) / (z * std::sqrt(std::numbers::pi));
    return c * erfcx * std::exp(w2 - z * z);
}

}  // namespace

LocalTimeCurve local_time(const SamplePath& path, LocalTimeMethod method, std::optional<double> bandwidth) {
    validate_path(path);
    const auto& x = path.values;
    const std::size_t n = x.size();
    const double dt = path.grid->dt();
    LocalTimeCurve out;
    out.estimator = method;
    std::vector<double> L(n, 0.0);
    switch (method) {
        case LocalTimeMethod::occupation: {
            const double eps = bandwidth.value_or(default_bandwidth(*path.grid));
            if (!(eps > 0.0)) throw std::invalid_argument("local_time: bandwidth must be positive");
            out.bandwidth = eps;
            const double w = dt / (2.0 * eps);
            double acc = 0.0;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                if (std::fabs(x[i]) <= eps) acc += w;
                L[i + 1] = acc;
            }
            break;
        }
        case LocalTimeMethod::tanaka: {
            // Per-step defects are exactly 0 between sign changes.
            for (std::size_t i = 0; i + 1 < n; ++i)
                L[i + 1] = L[i] + ((std::fabs(x[i + 1]) - std::fabs(x[i])) - sgn(x[i]) * (x[i + 1] - x[i]));
            break;
        }
        case LocalTimeMethod::bridge: {
            double acc = 0.0;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                acc += bridge_increment(x[i], x[i + 1], dt);
                L[i + 1] = acc;
            }
            break;
        }
    }
    out.curve = SamplePath{path.grid, std::move(L)};
    return out;
}

ResidualReport make_residual_report(std::string name, SamplePath curve, const SeedSpec& seed) {
    ResidualReport r;
    r.identity_name = std::move(name);
    r.n_steps = curve.grid->n_steps;
    r.seed = seed;
    double sup = 0.0;
    for (double v : curve.values) sup = std::max(sup, std::fabs(v));
    r.sup_norm = sup;
    r.terminal = curve.values.back();
    r.curve = std::move(curve);
    return r;
}

const char* to_string(IdentityKind k) {
    switch (k) {
        case IdentityKind::tanaka: return "tanaka";
        case IdentityKind::balayage_predictable: return "balayage_predictable";
        case IdentityKind::transform_c3: return "transform_c3";
    }
    return "unknown";
}

namespace {

ResidualReport tanaka_residual(const ResidualInputs& in) {
    if (!in.x) throw std::invalid_argument("identity_residual(tanaka): missing x");
    const SamplePath& X = *in.x;
    if (in.integral) require_aligned(X, *in.integral, "identity_residual(tanaka)");
    const LocalTimeCurve L = local_time(X, in.method, in.bandwidth);
    const auto& x = X.values;
    const auto& l = L.curve.values;
    std::vector<double> r(x.size(), 0.0);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double di = in.integral ? in.integral->values[i + 1] - in.integral->values[i]
                                      : sgn(x[i]) * (x[i + 1] - x[i]);
        acc += (std::fabs(x[i + 1]) - std::fabs(x[i])) - di - (l[i + 1] - l[i]);
        r[i + 1] = acc;
    }
    auto rep = make_residual_report("tanaka", SamplePath{X.grid, std::move(r)}, in.seed);
    rep.extras.emplace_back("local_time_terminal", l.back());
    return rep;
}

ResidualReport balayage_residual(const ResidualInputs& in) {
    if (!in.y) throw std::invalid_argument("identity_residual(balayage_predictable): missing y");
    if (!in.k) throw std::invalid_argument("identity_residual(balayage_predictable): missing k");
    const SamplePath& Y = *in.y;
    DecomposeOptions opts;
    opts.zero_reference = in.zero_reference;
    if (in.k_source) require_aligned(Y, *in.k_source, "identity_residual(balayage_predictable)");
    const LastZeroCurve lz = last_zero_curve(decompose_excursions(Y, opts));
    const auto& t = Y.grid->times;
    std::vector<double> kg(Y.size());
    for (std::size_t i = 0; i < kg.size(); ++i) {
        const std::size_t g = lz.gamma[i];
        kg[i] = in.k(in.k_source ? in.k_source->values[g] : t[g]);
    }
    // k_{i+1} Y_{i+1} - k_i Y_i - k_i (Y_{i+1} - Y_i) = (k_{i+1} - k_i) Y_{i+1}
    std::vector<double> r(Y.size(), 0.0);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < kg.size(); ++i) {
        acc += (kg[i + 1] - kg[i]) * Y.values[i + 1];
        r[i + 1] = acc;
    }
    return make_residual_report("balayage_predictable", SamplePath{Y.grid, std::move(r)}, in.seed);
}

ResidualReport transform_c3_residual(const ResidualInputs& in) {
    if (!in.x || !in.m || !in.v || !in.f || !in.F)
        throw std::invalid_argument("identity_residual(transform_c3): needs x (M), m, v, f and F");
    const SamplePath& M = *in.x;
    require_aligned(M, *in.m, "identity_residual(transform_c3)");
    require_aligned(M, *in.v, "identity_residual(transform_c3)");
    const auto& mv = M.values;
    const auto& m = in.m->values;
    const auto& v = in.v->values;
    std::vector<double> r(mv.size(), 0.0);
    double acc = -in.F(v[0]);
    r[0] = acc;
    double fv = in.f(v[0]);
    double Fv = in.F(v[0]);
    for (std::size_t i = 0; i + 1 < mv.size(); ++i) {
        const double fv1 = in.f(v[i + 1]);
        const double Fv1 = in.F(v[i + 1]);
        acc += (fv1 * mv[i + 1] - fv * mv[i]) - fv * (m[i + 1] - m[i]) - (Fv1 - Fv);
        r[i + 1] = acc;
        fv = fv1;
        Fv = Fv1;
    }
    return make_residual_report("transform_c3", SamplePath{M.grid, std::move(r)}, in.seed);
}

}  // namespace

ResidualReport identity_residual(IdentityKind kind, const ResidualInputs& in) {
    switch (kind) {
        case IdentityKind::tanaka: return tanaka_residual(in);
        case IdentityKind::balayage_predictable: return balayage_residual(in);
        case IdentityKind::transform_c3: return transform_c3_residual(in);
    }
    throw std::invalid_argument("identity_residual: unknown kind");
}

}  // namespace skewlab

namespace skewlab {

bool MeshStudy::strictly_decreasing() const {
    for (std::size_t i = 1; i < medians.size(); ++i)
        if (!(medians[i] < medians[i - 1])) return false;
    return !medians.empty();
}

SamplePath coupled_brownian(std::size_t coarse_steps, std::size_t finest_steps, const SeedSpec& seed) {
    if (finest_steps % coarse_steps != 0) throw std::invalid_argument("coupled_brownian: levels must nest");
    const SamplePath coarse = sample_brownian(make_grid(1.0, coarse_steps), seed.child("coarse"), 0.0);
    return refine_bridge(coarse, finest_steps / coarse_steps, seed.child("refine"));
}

namespace {

void check_levels(const std::vector<std::size_t>& levels) {
    if (levels.empty()) throw std::invalid_argument("mesh study: no levels");
    for (std::size_t i = 1; i < levels.size(); ++i)
        if (levels[i] <= levels[i - 1] || levels[i] % levels[0] != 0)
            throw std::invalid_argument("mesh study: levels must increase and nest");
}

MeshStudy collect(const std::vector<std::size_t>& levels, std::size_t n_seeds,
                  const std::function<std::vector<ResidualReport>(std::size_t)>& per_seed) {
    MeshStudy s;
    s.levels = levels;
    s.sup_norms.assign(levels.size(), {});
    for (std::size_t i = 0; i < n_seeds; ++i) {
        std::vector<ResidualReport> reps = per_seed(i);
        for (std::size_t l = 0; l < levels.size(); ++l) s.sup_norms[l].push_back(reps[l].sup_norm);
        if (i == 0) s.first_seed = std::move(reps);
    }
    for (auto& v : s.sup_norms) {
        std::vector<double> tmp = v;
        std::sort(tmp.begin(), tmp.end());
        const std::size_t n = tmp.size();
        s.medians.push_back(n % 2 ? tmp[n / 2] : 0.5 * (tmp[n / 2 - 1] + tmp[n / 2]));
    }
    return s;
}

}  // namespace

MeshStudy tanaka_mesh_study(const TanakaStudyOptions& opts) {
    check_levels(opts.levels);
    const std::size_t finest = std::max(opts.levels.back(), opts.reference_steps);
    if (finest % opts.levels[0] != 0) throw std::invalid_argument("tanaka_mesh_study: reference must nest");
    return collect(opts.levels, opts.n_seeds, [&](std::size_t i) {
        const SeedSpec si = opts.seed.with_index(i);
        const SamplePath fine = coupled_brownian(opts.levels[0], finest, si);
        std::optional<SamplePath> integral;
        if (opts.reference_steps > 0) integral = ito_sum(sign_path(fine), fine);
        std::vector<ResidualReport> out;
        for (std::size_t n : opts.levels) {
            const SamplePath x = restrict_path(fine, finest / n);
            std::optional<SamplePath> in;
            if (integral) in = restrict_path(*integral, finest / n);
            ResidualInputs r;
            r.x = &x;
            r.integral = in ? &*in : nullptr;
            r.method = opts.method;
            r.seed = si;
            out.push_back(identity_residual(IdentityKind::tanaka, r));
        }
        return out;
    });
}

MeshStudy balayage_mesh_study(const BalayageStudyOptions& opts) {
    check_levels(opts.levels);
    return collect(opts.levels, opts.n_seeds, [&](std::size_t i) {
        const SeedSpec si = opts.seed.with_index(i);
        const SamplePath fine = coupled_brownian(opts.levels[0], opts.levels.back(), si);
        std::vector<ResidualReport> out;
        for (std::size_t n : opts.levels) {
            const SamplePath b = restrict_path(fine, opts.levels.back() / n);
            const SamplePath y = abs_path(b);
            ResidualInputs r;
            r.y = &y;
            r.zero_reference = &b;
            r.k = opts.k;
            r.seed = si;
            out.push_back(identity_residual(IdentityKind::balayage_predictable, r));
        }
        return out;
    });
}

}  // namespace skewlab
