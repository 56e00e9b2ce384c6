#include "skewlab/skewbm.hpp"

#include "skewlab/stats.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace skewlab {

SkewConstruction build_skew_construction(const SkewBuildSpec& spec, const SeedSpec& seed) {
    const SamplePath& B = spec.base.total;
    validate_path(B);
    spec.schedule.validate();
    if (B.values[0] != spec.x0) throw std::invalid_argument("build_skew: base must start at x0");

    DecomposeOptions o;
    if (spec.base.zero_reference) o.zero_reference = &*spec.base.zero_reference;
    SkewConstruction out;
    out.excursions = decompose_excursions(B, o);

    if (spec.model && spec.model->family != ModelFamily::trivial) {
        const SignedMeasureModel& m = *spec.model;
        require_aligned(B, m.d_path, "build_skew");
        const bool null_on_h = mask_contained(m.h_set, dilate_mask(out.excursions.zero_set, spec.hypothesis_dilation));
        const double cov = quadratic_covariation(B, m.d_path).terminal();
        const bool orthogonal = std::fabs(cov) < spec.hypothesis_covariation_tol;
        if (spec.enforce_hypotheses && !(null_on_h && orthogonal)) {
            std::ostringstream os;
            os << "hypothesis-not-met: base null on H=" << (null_on_h ? "yes" : "no") << ", [base, D]_T=" << cov;
            throw HypothesisNotMet(os.str());
        }
    }

    out.assignment = assign_signs(out.excursions, *B.grid, spec.schedule, seed, spec.rule);
    if (spec.x0 != 0.0 && !out.excursions.intervals.empty() && out.excursions.intervals[0].first == 0) {
        const int keep = spec.variant == SignMode::signed_product ? 1 : (spec.x0 > 0.0 ? 1 : -1);
        for (int& s : out.assignment.signs[0]) s = keep;
    }
    out.sign = build_sign_path(out.excursions, out.assignment, spec.schedule, B.grid);
    out.x = apply_sign(out.sign, B, spec.variant);
    return out;
}

SamplePath build_skew(const SkewBuildSpec& spec, const SeedSpec& seed) {
    return build_skew_construction(spec, seed).x;
}

ResidualReport sde_residual(const SamplePath& x_alpha, const Decomposition& base, const SamplePath& sign,
                            const AlphaSchedule& schedule, SignMode variant) {
    const SamplePath& B = base.total;
    require_aligned(x_alpha, B, "sde_residual");
    require_aligned(sign, B, "sde_residual");
    schedule.validate();
    const auto& x = x_alpha.values;
    const auto& b = B.values;
    const auto& z = sign.values;
    const auto& t = B.grid->times;
    const SamplePath L = local_time(B, LocalTimeMethod::tanaka).curve;
    const auto& l = L.values;

    std::vector<double> r(x.size(), 0.0);
    std::vector<double> w(x.size(), 0.0);
    double acc = x[0] - b[0];
    r[0] = acc;
    double wacc = 0.0, qv = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double s = variant == SignMode::absolute ? sgn(b[i]) : 1.0;
        const double dw = z[i] * s * (b[i + 1] - b[i]);
        const double weight = 2.0 * schedule.alpha_at(t[i + 1]) - 1.0;
        acc += (x[i + 1] - x[i]) - dw - weight * (l[i + 1] - l[i]);
        r[i + 1] = acc;
        wacc += dw;
        w[i + 1] = wacc;
        qv += dw * dw;
    }
    ResidualReport rep = make_residual_report("sde", SamplePath{B.grid, std::move(r)}, {});
    rep.extras.emplace_back("qv_terminal", qv);
    rep.extras.emplace_back("local_time_terminal", l.back());
    rep.extras.emplace_back("driver_terminal", wacc);
    return rep;
}

double skew_transition_density(double alpha, double t, double y) {
    if (!(t > 0.0)) throw std::invalid_argument("skew_transition_density: t must be positive");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("skew_transition_density: alpha outside [0, 1]");
    const double phi = std::exp(-y * y / (2.0 * t)) / std::sqrt(2.0 * std::numbers::pi * t);
    if (y > 0.0) return 2.0 * alpha * phi;
    if (y < 0.0) return 2.0 * (1.0 - alpha) * phi;
    return phi;
}

double skew_cdf(double alpha, double t, double y) {
    if (!(t > 0.0)) throw std::invalid_argument("skew_cdf: t must be positive");
    const double p = standard_normal_cdf(y / std::sqrt(t));
    if (y < 0.0) return 2.0 * (1.0 - alpha) * p;
    return (1.0 - alpha) + 2.0 * alpha * (p - 0.5);
}

SamplePath harrison_shepp_walk(double alpha, std::size_t n_steps, const SeedSpec& seed) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("harrison_shepp_walk: alpha outside [0, 1]");
    if (n_steps == 0) throw std::invalid_argument("harrison_shepp_walk: n_steps must be at least 1");
    Engine eng = make_engine(seed);
    std::vector<double> v(n_steps + 1, 0.0);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_steps));
    long long s = 0;
    std::uint64_t bits = 0;
    int left = 0;
    for (std::size_t k = 1; k <= n_steps; ++k) {
        if (s == 0) {
            const double u = static_cast<double>(eng() >> 11) * 0x1.0p-53;
            s = u < alpha ? 1 : -1;
        } else {
            if (left == 0) {
                bits = eng();
                left = 64;
            }
            s += (bits & 1u) ? 1 : -1;
            bits >>= 1;
            --left;
        }
        v[k] = static_cast<double>(s) * scale;
    }
    return make_path(make_grid(1.0, n_steps), std::move(v));
}

double fraction_positive(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    std::size_t c = 0;
    for (double x : v) c += x > 0.0 ? 1 : 0;
    return static_cast<double>(c) / static_cast<double>(v.size());
}

TestReport law_test(const LawSample& sample, const std::function<double(double)>& cdf, const LawTestOptions& opts) {
    if (sample.values.size() < opts.min_samples)
        throw InsufficientSamples("law_test: " + std::to_string(sample.values.size()) + " samples, need " +
                                  std::to_string(opts.min_samples));
    TestReport r;
    r.suite = "law_ks_one_sample";
    r.n_paths = sample.values.size();
    r.statistic = ks_one_sample(sample.values, cdf, sample.lattice_spacing);
    r.threshold = ks_critical_one_sample(opts.level, sample.values.size()) + opts.lattice_allowance;
    bool ok = r.statistic < r.threshold;
    std::ostringstream os;
    os << "tag=" << sample.tag << " level=" << opts.level;
    if (sample.lattice_spacing > 0.0) os << " lattice_spacing=" << sample.lattice_spacing << " (midpoint convention)";
    if (opts.sign_reference) {
        const double p = fraction_positive(sample.values);
        const bool sign_ok = std::fabs(p - *opts.sign_reference) <= opts.sign_tolerance;
        ok = ok && sign_ok;
        os << " P(X>0)=" << p << " reference=" << *opts.sign_reference << " tol=" << opts.sign_tolerance;
    }
    set_verdict(r, ok);
    r.detail = os.str();
    return r;
}

TestReport law_test(const LawSample& a, const LawSample& b, const LawTestOptions& opts) {
    if (a.values.size() < opts.min_samples || b.values.size() < opts.min_samples)
        throw InsufficientSamples("law_test: both samples need at least " + std::to_string(opts.min_samples));
    std::vector<double> va = a.values, vb = b.values;
    double h = 0.0;
    if (b.lattice_spacing > 0.0) {
        h = b.lattice_spacing;
        for (double& x : va) x = snap_to_lattice(x, h, b.lattice_offset);
    } else if (a.lattice_spacing > 0.0) {
        h = a.lattice_spacing;
        for (double& x : vb) x = snap_to_lattice(x, h, a.lattice_offset);
    }
    TestReport r;
    r.suite = "law_ks_two_sample";
    r.n_paths = a.values.size() + b.values.size();
    r.statistic = ks_two_sample(std::move(va), std::move(vb));
    r.threshold = ks_critical_two_sample(opts.level, a.values.size(), b.values.size()) + opts.lattice_allowance;
    set_verdict(r, r.statistic < r.threshold);
    std::ostringstream os;
    os << "tags=" << a.tag << "," << b.tag << " level=" << opts.level;
    if (h > 0.0) os << " lattice_spacing=" << h << " allowance=" << opts.lattice_allowance;
    r.detail = os.str();
    return r;
}

std::vector<LawSample> skew_terminal_samples(const SkewSampleConfig& cfg) {
    if (cfg.schedules.empty()) throw std::invalid_argument("skew_terminal_samples: no schedules");
    const GridPtr grid = make_grid(cfg.horizon, cfg.n_steps);
    std::vector<LawSample> out(cfg.schedules.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k].values.reserve(cfg.n_paths);
        out[k].tag = "skew" + std::to_string(k);
    }
    SkewBuildSpec spec;
    spec.variant = cfg.variant;
    spec.rule = cfg.rule;
    spec.x0 = cfg.x0;
    for (std::size_t i = 0; i < cfg.n_paths; ++i) {
        const SeedSpec si = cfg.seed.with_index(i);
        SamplePath W = sample_brownian(grid, si.child("base"), cfg.x0);
        spec.base.total = std::move(W);
        const ExcursionSet exc = decompose_excursions(spec.base.total);
        const bool initial = cfg.x0 != 0.0 && !exc.intervals.empty() && exc.intervals[0].first == 0;
        for (std::size_t k = 0; k < cfg.schedules.size(); ++k) {
            const AlphaSchedule& sched = cfg.schedules[k];
            SignAssignment as = assign_signs(exc, *grid, sched, si.child("skew" + std::to_string(k)), cfg.rule);
            if (initial) {
                const int keep = cfg.variant == SignMode::signed_product ? 1 : (cfg.x0 > 0.0 ? 1 : -1);
                for (int& s : as.signs[0]) s = keep;
            }
            // Only the terminal value is needed: the sign of the excursion holding index N.
            const std::size_t N = cfg.n_steps;
            const double bN = spec.base.total.values[N];
            double zN = 0.0;
            if (!exc.intervals.empty() && exc.intervals.back().last == N) {
                const std::size_t n = exc.intervals.size() - 1;
                const auto& s = as.signs[n];
                const bool split = sched.piecewise && cfg.rule == SignRule::split;
                zN = split ? s[sched.cell_of(grid->times[N]) - as.first_cell[n]] : s[0];
            }
            out[k].values.push_back(cfg.variant == SignMode::absolute ? zN * std::fabs(bN) : zN * bN);
        }
    }
    return out;
}

LawSample walk_terminal_sample(double alpha, std::size_t n_steps, std::size_t n_paths, const SeedSpec& seed) {
    LawSample s;
    s.tag = "walk";
    s.values.reserve(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i)
        s.values.push_back(harrison_shepp_walk(alpha, n_steps, seed.with_index(i)).terminal());
    const double rn = std::sqrt(static_cast<double>(n_steps));
    s.lattice_spacing = 2.0 / rn;
    s.lattice_offset = static_cast<double>(n_steps % 2) / rn;
    return s;
}

}  // namespace skewlab

namespace skewlab {

MeshStudy sde_mesh_study(const SdeStudyOptions& opts) {
    if (opts.levels.empty()) throw std::invalid_argument("sde_mesh_study: no levels");
    MeshStudy s;
    s.levels = opts.levels;
    s.sup_norms.assign(opts.levels.size(), {});
    for (std::size_t i = 0; i < opts.n_seeds; ++i) {
        const SeedSpec si = opts.seed.with_index(i);
        const SamplePath fine = coupled_brownian(opts.levels[0], opts.levels.back(), si);
        for (std::size_t l = 0; l < opts.levels.size(); ++l) {
            SkewBuildSpec spec;
            spec.variant = opts.variant;
            spec.schedule = opts.schedule;
            spec.rule = opts.rule;
            spec.base.total = restrict_path(fine, opts.levels.back() / opts.levels[l]);
            const SkewConstruction c = build_skew_construction(spec, si.child("signs"));
            ResidualReport r = sde_residual(c.x, spec.base, c.sign, opts.schedule, opts.variant);
            r.seed = si;
            s.sup_norms[l].push_back(r.sup_norm);
            if (i == 0) s.first_seed.push_back(std::move(r));
        }
    }
    for (const auto& v : s.sup_norms) s.medians.push_back(median(v));
    return s;
}

}  // namespace skewlab
