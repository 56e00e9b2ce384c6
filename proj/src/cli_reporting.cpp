#include "skewlab/cli_reporting.hpp"

#include "skewlab/skewbm.hpp"
#include "skewlab/stats.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

namespace skewlab {

namespace {

using json = nlohmann::ordered_json;

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep)) out.push_back(trim(item));
    return out;
}

std::string fmt(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& key, const std::string& v) {
    const std::string t = trim(v);
    double x = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), x);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
        throw UsageError(key, "not a number: '" + v + "'");
    return x;
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
    const std::string t = trim(v);
    std::uint64_t x = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), x);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
        throw UsageError(key, "not a non-negative integer: '" + v + "'");
    return x;
}

std::vector<double> parse_double_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (const auto& s : split(v, ',')) out.push_back(parse_double(key, s));
    if (out.empty()) throw UsageError(key, "empty list");
    return out;
}

template <class T>
std::string join(const std::vector<T>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        if constexpr (std::is_floating_point_v<T>) out += fmt(v[i]);
        else out += std::to_string(v[i]);
    }
    return out;
}

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"identities",   "martingale",     "sigma_h",     "skew_law",
                                                "skew_residual", "representation", "equivalence", "all"};
    return names;
}

bool is_control(const std::string& instance) {
    return instance == "drifted" || instance == "exp_drift" || instance == "density";
}

std::string timestamp_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void expected_rejection(TestReport& r, bool rejected) {
    set_verdict(r, rejected);
    r.detail = "expected rejection (negative control): " + r.detail;
}

CurveSeries series_from(const std::string& name, const SamplePath& p, std::size_t max_points = 4097) {
    CurveSeries s;
    s.series = name;
    const std::size_t n = p.values.size();
    const std::size_t stride = std::max<std::size_t>(1, (n + max_points - 2) / (max_points - 1));
    for (std::size_t i = 0; i < n; i += stride) {
        s.t.push_back(p.time(i));
        s.value.push_back(p.values[i]);
    }
    if ((n - 1) % stride != 0) {
        s.t.push_back(p.time(n - 1));
        s.value.push_back(p.values[n - 1]);
    }
    return s;
}

void add_mesh_study(ReportBundle& b, const std::string& suite, const MeshStudy& study, double tol,
                    const SeedSpec& seed) {
    for (auto& r : mesh_reports(suite, study, tol, seed)) b.reports.push_back(std::move(r));
    CurveFile cf;
    cf.name = suite;
    std::replace(cf.name.begin(), cf.name.end(), '/', '_');
    for (std::size_t l = 0; l < study.first_seed.size(); ++l) {
        b.residuals.push_back(study.first_seed[l]);
        cf.series.push_back(series_from("N=" + std::to_string(study.levels[l]), study.first_seed[l].curve));
    }
    b.curves.push_back(std::move(cf));
}

const std::vector<std::size_t> kMeshLevels{4096, 16384, 65536};

ModelFamily family_or(const ExperimentConfig& cfg, ModelFamily fallback) {
    return cfg.model.value_or(fallback);
}

// identities ------------------------------------------------------------------

void run_identities(const ExperimentConfig& cfg, ReportBundle& b) {
    const auto levels = cfg.steps_or(kMeshLevels);

    TanakaStudyOptions t;
    t.levels = levels;
    t.n_seeds = cfg.n_seeds;
    t.reference_steps = cfg.reference_steps;
    t.seed = SeedSpec{cfg.seed, "identities/tanaka", 0};
    add_mesh_study(b, "identities/tanaka", tanaka_mesh_study(t), cfg.tolerance("tanaka"), t.seed);

    BalayageStudyOptions k;
    k.levels = levels;
    k.n_seeds = cfg.n_seeds;
    k.seed = SeedSpec{cfg.seed, "identities/balayage", 0};
    add_mesh_study(b, "identities/balayage", balayage_mesh_study(k), cfg.tolerance("balayage"), k.seed);

    const SeedSpec s1{cfg.seed, "identities/balayage_k1", 0};
    const SamplePath B = sample_brownian(make_grid(1.0, levels.back()), s1, 0.0);
    const SamplePath Y = abs_path(B);
    ResidualInputs in;
    in.y = &Y;
    in.zero_reference = &B;
    in.k = [](double) { return 1.0; };
    in.seed = s1;
    const ResidualReport rr = identity_residual(IdentityKind::balayage_predictable, in);
    TestReport r;
    r.suite = "identities/balayage_k1";
    r.statistic = rr.sup_norm;
    r.threshold = 0.0;
    r.n_paths = 1;
    r.n_steps = levels.back();
    r.seed = s1;
    set_verdict(r, rr.sup_norm <= 0.0);
    r.detail = "k = 1, Y = |B|: residual must vanish exactly";
    b.reports.push_back(std::move(r));
}

// martingale ------------------------------------------------------------------

void run_martingale(const ExperimentConfig& cfg, ReportBundle& b) {
    const ModelFamily family = family_or(cfg, ModelFamily::shifted_brownian);
    const std::vector<std::string> instances =
        cfg.instance ? std::vector<std::string>{*cfg.instance}
                     : std::vector<std::string>{"brownian", "brownian_plus_local_time", "drifted"};
    const auto steps = cfg.steps_or({1024, 65536});
    const std::size_t n_drift = steps.front();
    const std::size_t n_qp = steps.back();
    const GridPtr gd = make_grid(cfg.horizon, n_drift);
    const GridPtr gq = make_grid(cfg.horizon, n_qp);

    for (const auto& name : instances) {
        const bool control = is_control(name);
        const SeedSpec seed{cfg.seed, "martingale/" + name, 0};

        DriftOptions dopt;
        dopt.threshold = cfg.tolerance("drift");
        auto gen = [&](std::size_t i) {
            const SeedSpec si = seed.with_index(i);
            const SignedMeasureModel model = build_model(family, gd, si);
            return multiply_paths(model.d_path, make_instance(name, model, si).total);
        };
        TestReport d = martingale_drift_test(gen, cfg.n_paths, dopt, seed);
        d.suite = "martingale/drift/" + name;
        d.detail = "model=" + std::string(to_string(family)) + " P=D*M; " + d.detail;
        if (control) {
            d.threshold = cfg.tolerance("control_drift");
            expected_rejection(d, d.statistic > d.threshold);
        }
        b.reports.push_back(std::move(d));

        TestReport q;
        q.suite = "martingale/qp/" + name;
        q.seed = seed.child("qp");
        if (!control) {
            std::vector<double> terms;
            ResidualReport first;
            for (std::size_t i = 0; i < cfg.n_seeds; ++i) {
                const SeedSpec si = q.seed.with_index(i);
                const SignedMeasureModel model = build_model(family, gq, si);
                ResidualReport rr = qp_residual(make_instance(name, model, si), model);
                terms.push_back(std::fabs(rr.terminal));
                if (i == 0) {
                    rr.seed = si;
                    first = std::move(rr);
                }
            }
            q.statistic = median(terms);
            q.threshold = cfg.tolerance("qp");
            q.n_paths = cfg.n_seeds;
            q.n_steps = n_qp;
            set_verdict(q, q.statistic < q.threshold);
            q.detail = "median |terminal qp residual| over seeds";
            CurveFile cf{"martingale_qp_" + name, {series_from("seed0", first.curve)}};
            b.curves.push_back(std::move(cf));
            b.residuals.push_back(std::move(first));
        } else if (name == "drifted") {
            std::vector<double> terms;
            for (std::size_t i = 0; i < cfg.n_paths; ++i) {
                const SeedSpec si = q.seed.with_index(i);
                const SignedMeasureModel model = build_model(family, gd, si);
                terms.push_back(qp_residual(make_instance(name, model, si), model).terminal);
            }
            const double m = mean(terms);
            q.statistic = std::fabs(m - cfg.horizon);
            q.threshold = cfg.tolerance("control_qp");
            q.n_paths = cfg.n_paths;
            q.n_steps = n_drift;
            set_verdict(q, q.statistic < q.threshold);
            q.detail = "expected rejection (negative control): mean terminal residual " + fmt(m) +
                       " vs oracle E[int D dt] = " + fmt(cfg.horizon);
        } else {
            continue;
        }
        b.reports.push_back(std::move(q));
    }
}

// sigma_h ---------------------------------------------------------------------

void run_sigma_h(const ExperimentConfig& cfg, ReportBundle& b) {
    const ModelFamily family = family_or(cfg, ModelFamily::shifted_brownian);
    const std::vector<std::string> instances =
        cfg.instance ? std::vector<std::string>{*cfg.instance}
                     : std::vector<std::string>{"abs_brownian", "brownian_plus_local_time", "drifted"};
    const std::size_t n = cfg.steps_or({65536}).back();
    const GridPtr grid = make_grid(cfg.horizon, n);
    SigmaOptions so;
    so.carried_tol = cfg.tolerance("carried");
    so.qp_tol = cfg.tolerance("qp");
    for (const auto& name : instances) {
        const bool control = is_control(name);
        const SeedSpec seed{cfg.seed, "sigma_h/" + name, 0};
        double lo = kInf, hi = -kInf;
        std::size_t passed = 0;
        for (std::size_t i = 0; i < cfg.n_seeds; ++i) {
            const SeedSpec si = seed.with_index(i);
            const SignedMeasureModel model = build_model(family, grid, si);
            const TestReport r = sigma_h_check(make_instance(name, model, si), model, so);
            lo = std::min(lo, r.statistic);
            hi = std::max(hi, r.statistic);
            passed += r.pass ? 1 : 0;
        }
        TestReport r;
        r.suite = "sigma_h/" + name;
        r.threshold = 1.0 - so.carried_tol;
        r.n_paths = cfg.n_seeds;
        r.n_steps = n;
        r.seed = seed;
        r.detail = "model=" + std::string(to_string(family)) + " dilation=" + std::to_string(so.dilation) +
                   " paths passing=" + std::to_string(passed) + "/" + std::to_string(cfg.n_seeds);
        if (control) {
            r.statistic = hi;
            expected_rejection(r, passed == 0);
        } else {
            r.statistic = lo;
            set_verdict(r, passed == cfg.n_seeds);
        }
        b.reports.push_back(std::move(r));
    }
}

// skew_law --------------------------------------------------------------------

CurveFile density_overlay(const std::vector<double>& v, double alpha, double t) {
    const int bins = 80;
    const double lo = -4.0 * std::sqrt(t), hi = 4.0 * std::sqrt(t), w = (hi - lo) / bins;
    std::vector<double> counts(bins, 0.0);
    for (double x : v) {
        const int k = static_cast<int>(std::floor((x - lo) / w));
        if (k >= 0 && k < bins) counts[k] += 1.0;
    }
    CurveSeries emp{"empirical", {}, {}}, th{"skew_transition_density", {}, {}};
    for (int k = 0; k < bins; ++k) {
        const double x = lo + (k + 0.5) * w;
        emp.t.push_back(x);
        emp.value.push_back(counts[k] / (static_cast<double>(v.size()) * w));
        th.t.push_back(x);
        th.value.push_back(skew_transition_density(alpha, t, x));
    }
    return CurveFile{"skew_law_density", {emp, th}};
}

void run_skew_law(const ExperimentConfig& cfg, ReportBundle& b) {
    if (family_or(cfg, ModelFamily::trivial) != ModelFamily::trivial)
        throw UsageError("model", "skew_law runs under the trivial model only");
    const AlphaSchedule sched = cfg.schedule();
    for (double v : sched.values)
        if (v != sched.values[0]) throw UsageError("schedule.values", "skew_law needs a constant alpha");
    const double alpha = sched.values[0];
    const double ref = cfg.variant == SignMode::absolute ? alpha : 0.5;
    const std::size_t n = cfg.steps_or({4096}).front();

    LawTestOptions lo;
    lo.level = cfg.tolerance("ks_level");
    lo.sign_reference = ref;
    lo.sign_tolerance = cfg.tolerance("sign");
    auto cdf = [&](double y) { return skew_cdf(ref, cfg.horizon, y); };

    std::vector<TestReport> one, two;
    for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
        SkewSampleConfig sc;
        sc.schedules = {sched};
        sc.variant = cfg.variant;
        sc.rule = cfg.rule;
        sc.n_paths = cfg.n_paths;
        sc.n_steps = n;
        sc.horizon = cfg.horizon;
        sc.seed = SeedSpec{cfg.seed, "skew_law/rep" + std::to_string(rep), 0};
        const LawSample s = skew_terminal_samples(sc)[0];
        TestReport r = law_test(s, cdf, lo);
        r.suite = "skew_law/ks_one_sample";
        r.n_steps = n;
        r.seed = sc.seed;
        r.detail = "alpha=" + fmt(alpha) + " reference_alpha=" + fmt(ref) + " " + r.detail;
        one.push_back(r);
        if (rep == 0) b.curves.push_back(density_overlay(s.values, ref, cfg.horizon));

        if (cfg.variant == SignMode::absolute && cfg.horizon == 1.0) {
            const SeedSpec ws{cfg.seed, "skew_law/walk/rep" + std::to_string(rep), 0};
            const LawSample walk = walk_terminal_sample(alpha, n, cfg.n_paths, ws);
            LawTestOptions l2 = lo;
            l2.sign_reference.reset();
            l2.lattice_allowance = cfg.tolerance("lattice");
            TestReport w = law_test(s, walk, l2);
            w.suite = "skew_law/ks_two_sample_walk";
            w.n_steps = n;
            w.seed = ws;
            two.push_back(w);
        }
    }

    auto collect = [&](std::vector<TestReport>& v) {
        if (v.empty()) return;
        if (v.size() == 1) {
            b.reports.push_back(v[0]);
            return;
        }
        const std::size_t need = (8 * v.size() + 9) / 10;
        std::size_t passed = 0;
        std::string stats;
        for (const auto& r : v) {
            passed += r.pass ? 1 : 0;
            stats += (stats.empty() ? "" : ",") + fmt(r.statistic);
        }
        TestReport a = v[0];
        a.suite += "/repetitions";
        a.statistic = static_cast<double>(passed);
        a.threshold = static_cast<double>(need);
        a.seed = SeedSpec{cfg.seed, "skew_law", 0};
        set_verdict(a, passed >= need);
        a.detail = "repetitions passing " + std::to_string(passed) + "/" + std::to_string(v.size()) +
                   " (need " + std::to_string(need) + "); ks statistics " + stats;
        b.reports.push_back(a);
    };
    collect(one);
    collect(two);
}

// skew_residual ---------------------------------------------------------------

void run_skew_residual(const ExperimentConfig& cfg, ReportBundle& b) {
    if (family_or(cfg, ModelFamily::trivial) != ModelFamily::trivial)
        throw UsageError("model", "skew_residual runs under the trivial model only");
    SdeStudyOptions o;
    o.levels = cfg.steps_or(kMeshLevels);
    o.n_seeds = cfg.n_seeds;
    o.schedule = cfg.schedule();
    o.rule = cfg.rule;
    o.variant = cfg.variant;
    o.seed = SeedSpec{cfg.seed, "skew_residual", 0};
    add_mesh_study(b, "skew_residual/sde", sde_mesh_study(o), cfg.tolerance("sde"), o.seed);
}

// representation --------------------------------------------------------------

void run_representation(const ExperimentConfig& cfg, ReportBundle& b) {
    std::vector<std::pair<ModelFamily, std::string>> cases;
    auto default_instance = [](ModelFamily f) { return f == ModelFamily::trivial ? "brownian" : "relative"; };
    if (cfg.model) cases.emplace_back(*cfg.model, cfg.instance.value_or(default_instance(*cfg.model)));
    else if (cfg.instance) cases.emplace_back(ModelFamily::shifted_brownian, *cfg.instance);
    else cases = {{ModelFamily::trivial, "brownian"}, {ModelFamily::shifted_brownian, "relative"}};
    const std::size_t n = cfg.steps_or({1024}).front();
    const GridPtr grid = make_grid(cfg.horizon, n);
    const auto events = default_events();
    for (const auto& [family, instance] : cases) {
        const SeedSpec seed{cfg.seed, "representation/" + std::string(to_string(family)) + "/" + instance, 0};
        const auto gen = representation_generator(family, instance, grid, seed);
        for (double T : {0.5 * cfg.horizon, cfg.horizon}) {
            StoppingRule stop;
            stop.time = T;
            TestReport r = optional_representation_check(gen, stop, events, cfg.n_paths,
                                                         RepresentationWeighting::q_weighted,
                                                         cfg.tolerance("representation"), seed);
            r.suite = "representation/" + std::string(to_string(family)) + "/" + instance + "/T=" + fmt(T);
            if (is_control(instance)) expected_rejection(r, !r.pass);
            b.reports.push_back(std::move(r));
        }
    }
}

// equivalence -----------------------------------------------------------------


void run_equivalence(const ExperimentConfig& cfg, ReportBundle& b) {
    EquivalenceOptions eo;
    eo.n_steps = cfg.steps_or({1024}).front();
    eo.n_paths = cfg.n_paths;
    eo.horizon = cfg.horizon;
    eo.alpha = cfg.alpha;
    eo.qp_tol = cfg.tolerance("qp");
    eo.drift.threshold = cfg.tolerance("drift");
    eo.sigma.carried_tol = cfg.tolerance("carried");
    eo.sigma.qp_tol = cfg.tolerance("qp");
    eo.ks_level = cfg.tolerance("ks_level");
    for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
        for (const auto& c : equivalence_cases()) {
            if (cfg.model && *cfg.model != c.family) continue;
            if (cfg.instance && *cfg.instance != c.instance) continue;
            const SeedSpec seed{cfg.seed, "equivalence/" + c.suite + "/" + c.instance + "/rep" + std::to_string(rep),
                                0};
            const EquivalenceResult res = equivalence_suite(c.suite, c.family, c.instance, seed, eo);
            TestReport r = res.summary;
            r.suite = "equivalence/" + c.suite + "/" + c.instance;
            const bool expect = c.positive;
            const bool ok = res.left.pass == expect && res.right.pass == expect;
            r.detail = std::string(c.positive ? "expected pass/pass; " : "expected fail/fail (negative control); ") +
                       r.detail + "; left: " + res.left.detail + "; right: " + res.right.detail;
            if (r.status == ReportStatus::hypothesis_not_met) {
                r.pass = false;
            } else {
                set_verdict(r, ok);
            }
            b.reports.push_back(std::move(r));
        }
    }
}

const std::map<std::string, std::function<void(const ExperimentConfig&, ReportBundle&)>>& runners() {
    static const std::map<std::string, std::function<void(const ExperimentConfig&, ReportBundle&)>> m{
        {"identities", run_identities},   {"martingale", run_martingale},         {"sigma_h", run_sigma_h},
        {"skew_law", run_skew_law},       {"skew_residual", run_skew_residual}, {"representation", run_representation},
        {"equivalence", run_equivalence},
    };
    return m;
}

}  // namespace

// config ----------------------------------------------------------------------

std::vector<std::pair<std::string, double>> tolerance_names() {
    return {
        {"tanaka", 0.05},     {"balayage", 0.05},   {"sde", 0.1},         {"qp", 0.05},
        {"drift", 4.0},       {"control_drift", 5.0}, {"control_qp", 0.05}, {"carried", 0.05},
        {"representation", 4.0}, {"ks_level", 0.01}, {"sign", 0.01},      {"lattice", 0.005},
    };
}

ReportFormat parse_format(const std::string& s) {
    if (s == "json") return ReportFormat::json;
    if (s == "csv") return ReportFormat::csv;
    throw UsageError("format", "expected json or csv, got '" + s + "'");
}

AlphaSchedule ExperimentConfig::schedule() const {
    if (!schedule_values) return AlphaSchedule::constant(alpha);
    const std::vector<double> bounds = schedule_boundaries.value_or(std::vector<double>{0.0});
    return AlphaSchedule::piecewise_constant(bounds, *schedule_values);
}

double ExperimentConfig::tolerance(const std::string& name) const {
    if (auto it = tolerances.find(name); it != tolerances.end()) return it->second;
    for (const auto& [k, v] : tolerance_names())
        if (k == name) return v;
    throw std::invalid_argument("unknown tolerance " + name);
}

std::vector<std::size_t> ExperimentConfig::steps_or(std::vector<std::size_t> fallback) const {
    return n_steps ? *n_steps : fallback;
}

void apply_setting(ExperimentConfig& cfg, const std::string& raw_key, const std::string& value) {
    const std::string key = trim(raw_key);
    const std::string v = trim(value);
    if (key == "suite") {
        if (std::find(suite_names().begin(), suite_names().end(), v) == suite_names().end())
            throw UsageError(key, "unknown suite '" + v + "'");
        cfg.suite = v;
    } else if (key == "model") {
        try {
            cfg.model = parse_model_family(v);
        } catch (const std::exception& e) {
            throw UsageError(key, e.what());
        }
    } else if (key == "instance") {
        const auto names = instance_names();
        if (std::find(names.begin(), names.end(), v) == names.end())
            throw UsageError(key, "unknown instance '" + v + "'");
        cfg.instance = v;
    } else if (key == "alpha") {
        cfg.alpha = parse_double(key, v);
    } else if (key == "schedule.boundaries") {
        cfg.schedule_boundaries = parse_double_list(key, v);
    } else if (key == "schedule.values") {
        cfg.schedule_values = parse_double_list(key, v);
    } else if (key == "schedule.rule") {
        if (v == "split") cfg.rule = SignRule::split;
        else if (v == "hold_from_start") cfg.rule = SignRule::hold_from_start;
        else throw UsageError(key, "expected split or hold_from_start");
    } else if (key == "variant") {
        if (v == "absolute") cfg.variant = SignMode::absolute;
        else if (v == "signed") cfg.variant = SignMode::signed_product;
        else throw UsageError(key, "expected absolute or signed");
    } else if (key == "paths") {
        cfg.n_paths = parse_uint(key, v);
    } else if (key == "steps") {
        std::vector<std::size_t> s;
        for (const auto& x : split(v, ',')) s.push_back(parse_uint(key, x));
        if (s.empty()) throw UsageError(key, "empty list");
        cfg.n_steps = s;
    } else if (key == "seeds") {
        cfg.n_seeds = parse_uint(key, v);
    } else if (key == "repetitions") {
        cfg.repetitions = parse_uint(key, v);
    } else if (key == "reference_steps") {
        cfg.reference_steps = parse_uint(key, v);
    } else if (key == "horizon") {
        cfg.horizon = parse_double(key, v);
    } else if (key == "seed") {
        cfg.seed = parse_uint(key, v);
    } else if (key == "out") {
        cfg.out_dir = v;
    } else if (key == "format") {
        cfg.format = parse_format(v);
    } else if (key.rfind("tol.", 0) == 0) {
        const std::string name = key.substr(4);
        bool known = false;
        for (const auto& [k, d] : tolerance_names()) known = known || k == name;
        if (!known) throw UsageError(key, "unknown tolerance");
        cfg.tolerances[name] = parse_double(key, v);
    } else {
        throw UsageError(key, "unknown key");
    }
}

ExperimentConfig parse_config_text(const std::string& text, ExperimentConfig base) {
    std::istringstream is(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError(trim(line), "line " + std::to_string(lineno) + " is not key=value");
        apply_setting(base, line.substr(0, eq), line.substr(eq + 1));
    }
    return base;
}

ExperimentConfig load_config_file(const std::filesystem::path& path, ExperimentConfig base) {
    std::ifstream in(path);
    if (!in) throw UsageError("config", "cannot read " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config_text(os.str(), std::move(base));
}

void validate_config(const ExperimentConfig& cfg) {
    if (std::find(suite_names().begin(), suite_names().end(), cfg.suite) == suite_names().end())
        throw UsageError("suite", "unknown suite '" + cfg.suite + "'");
    if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0)) throw UsageError("alpha", "must lie in [0, 1]");
    if (cfg.n_paths == 0) throw UsageError("paths", "must be positive");
    if (cfg.n_seeds == 0) throw UsageError("seeds", "must be positive");
    if (cfg.repetitions == 0) throw UsageError("repetitions", "must be positive");
    if (!(cfg.horizon > 0.0)) throw UsageError("horizon", "must be positive");
    if (cfg.n_steps) {
        if (cfg.n_steps->empty()) throw UsageError("steps", "empty list");
        for (std::size_t i = 0; i < cfg.n_steps->size(); ++i) {
            const std::size_t n = (*cfg.n_steps)[i];
            if (n == 0) throw UsageError("steps", "must be positive");
            if (i > 0) {
                const std::size_t p = (*cfg.n_steps)[i - 1];
                const std::size_t f = n / p;
                if (n <= p || n % p != 0 || (f & (f - 1)) != 0)
                    throw UsageError("steps", "mesh levels must increase by powers of two");
            }
        }
    }
    if (cfg.suite == "identities" || cfg.suite == "all") {
        const std::size_t last = cfg.steps_or(kMeshLevels).back();
        const std::size_t f = cfg.reference_steps / last;
        if (cfg.reference_steps < last || cfg.reference_steps % last != 0 || (f & (f - 1)) != 0)
            throw UsageError("reference_steps", "must be a power-of-two multiple of the finest level");
    }
    if (cfg.schedule_boundaries && !cfg.schedule_values)
        throw UsageError("schedule.values", "required with schedule.boundaries");
    try {
        cfg.schedule().validate();
    } catch (const std::exception& e) {
        throw UsageError(cfg.schedule_values ? "schedule.values" : "alpha", e.what());
    }
    for (const auto& [k, v] : cfg.tolerances)
        if (!(v > 0.0)) throw UsageError("tol." + k, "must be positive");
}

std::vector<std::pair<std::string, std::string>> config_echo(const ExperimentConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> e;
    e.emplace_back("suite", cfg.suite);
    e.emplace_back("model", cfg.model ? to_string(*cfg.model) : "default");
    e.emplace_back("instance", cfg.instance.value_or("default"));
    e.emplace_back("alpha", fmt(cfg.alpha));
    e.emplace_back("schedule.boundaries", cfg.schedule_boundaries ? join(*cfg.schedule_boundaries) : "");
    e.emplace_back("schedule.values", cfg.schedule_values ? join(*cfg.schedule_values) : "");
    e.emplace_back("schedule.rule", cfg.rule == SignRule::split ? "split" : "hold_from_start");
    e.emplace_back("variant", cfg.variant == SignMode::absolute ? "absolute" : "signed");
    e.emplace_back("paths", std::to_string(cfg.n_paths));
    e.emplace_back("steps", cfg.n_steps ? join(*cfg.n_steps) : "default");
    e.emplace_back("seeds", std::to_string(cfg.n_seeds));
    e.emplace_back("repetitions", std::to_string(cfg.repetitions));
    e.emplace_back("reference_steps", std::to_string(cfg.reference_steps));
    e.emplace_back("horizon", fmt(cfg.horizon));
    e.emplace_back("seed", std::to_string(cfg.seed));
    e.emplace_back("format", cfg.format == ReportFormat::json ? "json" : "csv");
    for (const auto& [k, d] : tolerance_names()) e.emplace_back("tol." + k, fmt(cfg.tolerance(k)));
    return e;
}

std::string default_output_dir() {
    if (const char* env = std::getenv("SKEWLAB_OUT_DIR"); env && *env) return env;
    return "skewlab_out";
}

// suites ----------------------------------------------------------------------

std::vector<EquivalenceCase> equivalence_cases() {
    const auto S = ModelFamily::shifted_brownian;
    const auto T = ModelFamily::trivial;
    return {
        {"abs_mart", S, "exp_martingale", true},
        {"abs_mart", S, "exp_drift", false},
        {"zalpha_mart", S, "exp_martingale", true},
        {"zalpha_mart", S, "exp_drift", false},
        {"abs_sigma", S, "abs_brownian", true},
        {"abs_sigma", S, "brownian_plus_local_time", true},
        {"abs_sigma", S, "drifted", false},
        {"zalpha_sigma", S, "abs_brownian", true},
        {"zalpha_sigma", S, "brownian_plus_local_time", true},
        {"zalpha_sigma", S, "drifted", false},
        {"cmart", T, "abs_brownian", true},
        {"cmart", T, "drifted", false},
        {"ito_xdx", S, "brownian", true},
        {"ito_xdx", S, "drifted", false},
        {"qp_brownian", S, "brownian", true},
        {"qp_brownian", S, "drifted", false},
    };
}


std::vector<SuiteInfo> list_suites() {
    return {
        {"identities", "Tanaka and balayage pathwise identities on coupled mesh levels"},
        {"martingale", "drift tests and qp residuals of D*M for the (Q,P)-martingale zoo"},
        {"sigma_h", "Sigma(H) membership: finite variation part carried by {X = 0} u H"},
        {"skew_law", "terminal law of the sign-flip construction vs the skew density and the skew walk"},
        {"skew_residual", "SDE residual of the construction across mesh levels"},
        {"representation", "optional representation formula tested against an event dictionary"},
        {"equivalence", "left/right verdict agreement for the equivalence theorems"},
        {"all", "every suite above"},
    };
}

std::string describe_suite(const std::string& name) {
    std::ostringstream os;
    if (name == "identities") {
        os << "identities: Tanaka residual |X_t| - |X_0| - I_t - L_t (I from the reference_steps coupled refinement,\n"
              "L bridge estimator at the tested mesh) and balayage residual with k = cos(gamma_t), Y = |B|.\n"
              "Median sup-norm over `seeds` paths per level; each level must beat the previous one and the finest\n"
              "must be below tol.tanaka / tol.balayage. Also checks k = 1 gives residual exactly 0.\n"
              "default steps: 4096,16384,65536";
    } else if (name == "martingale") {
        os << "martingale: for each instance (default brownian, brownian_plus_local_time, drifted) under\n"
              "the model (default shifted_brownian): drift test of D*M at steps[0] with `paths` paths\n"
              "(threshold tol.drift), and the median |terminal qp residual| over `seeds` paths at steps[-1].\n"
              "The drifted control must be rejected (statistic > tol.control_drift, mean residual near T).\n"
              "default steps: 1024,65536";
    } else if (name == "sigma_h") {
        os << "sigma_h: sigma_h_check on `seeds` paths at steps[-1] for abs_brownian,\n"
              "brownian_plus_local_time (must pass on every path) and drifted (must fail on every path).\n"
              "default steps: 65536";
    } else if (name == "skew_law") {
        os << "skew_law: trivial model, constant alpha. One-sample KS of the terminal value against the skew\n"
              "transition CDF plus |P(X_T > 0) - alpha| <= tol.sign, and two-sample KS against the skew random\n"
              "walk (tol.lattice allowance). With repetitions > 1, 80% of repetitions must pass.\n"
              "default steps: 4096";
    } else if (name == "skew_residual") {
        os << "skew_residual: sde_residual median sup-norm over `seeds` coupled paths for the schedule,\n"
              "decreasing across levels and below tol.sde at the finest. default steps: 4096,16384,65536";
    } else if (name == "representation") {
        os << "representation: E[D_T (M_T - M_gamma_T) 1_A] vs E[D_inf M_inf 1{gbar < T} 1_A] for the default\n"
              "event dictionary at T = horizon/2 and horizon; trivial/brownian and shifted_brownian/relative\n"
              "unless model or instance is set. default steps: 1024";
    } else if (name == "equivalence") {
        os << "equivalence: abs_mart, zalpha_mart, abs_sigma, zalpha_sigma, cmart, ito_xdx, qp_brownian on\n"
              "positive instances (expected pass/pass) and negative controls (expected fail/fail),\n"
              "`repetitions` independent runs. default steps: 1024";
    } else if (name == "all") {
        os << "all: identities, martingale, sigma_h, skew_law, skew_residual, representation, equivalence";
    } else {
        throw UsageError("suite", "unknown suite '" + name + "'");
    }
    return os.str();
}

std::vector<TestReport> mesh_reports(const std::string& suite, const MeshStudy& study, double tol,
                                     const SeedSpec& seed) {
    std::vector<TestReport> out;
    for (std::size_t l = 0; l < study.levels.size(); ++l) {
        TestReport r;
        r.suite = suite + "/N=" + std::to_string(study.levels[l]);
        r.statistic = study.medians[l];
        r.threshold = l == 0 ? kInf : study.medians[l - 1];
        if (l + 1 == study.levels.size()) r.threshold = std::min(r.threshold, tol);
        r.n_paths = study.sup_norms[l].size();
        r.n_steps = study.levels[l];
        r.seed = seed;
        set_verdict(r, r.statistic < r.threshold);
        r.detail = "median sup-norm residual over seeds";
        if (l > 0) r.detail += "; must be below the previous level";
        if (l + 1 == study.levels.size()) r.detail += "; tolerance " + fmt(tol);
        out.push_back(std::move(r));
    }
    return out;
}

ReportBundle run_experiment(const ExperimentConfig& cfg) {
    validate_config(cfg);
    ReportBundle b;
    b.provenance.config = config_echo(cfg);
    b.provenance.master_seed = std::to_string(cfg.seed);
    b.provenance.timestamp = timestamp_now();
    const std::vector<std::string> order{"identities",    "martingale",     "sigma_h",    "skew_law",
                                         "skew_residual", "representation", "equivalence"};
    for (const auto& name : order) {
        if (cfg.suite != "all" && cfg.suite != name) continue;
        try {
            runners().at(name)(cfg, b);
        } catch (const HypothesisNotMet& e) {
            TestReport r;
            r.suite = name;
            r.seed = SeedSpec{cfg.seed, name, 0};
            r.pass = false;
            r.status = ReportStatus::hypothesis_not_met;
            r.detail = std::string("hypothesis-not-met: ") + e.what();
            b.reports.push_back(std::move(r));
        }
    }
    return b;
}

// output ----------------------------------------------------------------------

namespace {

json number_or_null(double x) {
    if (std::isfinite(x)) return x;
    return nullptr;
}

double from_json_number(const json& j) {
    if (j.is_null()) return kInf;
    return j.get<double>();
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError("cannot write " + p.string());
    out << content;
    out.flush();
    if (!out) throw IoError("write failed: " + p.string());
}

}  // namespace

std::string render_json(const ReportBundle& bundle) {
    json doc;
    json prov;
    json cfg = json::object();
    for (const auto& [k, v] : bundle.provenance.config) cfg[k] = v;
    prov["config"] = cfg;
    prov["master_seed"] = bundle.provenance.master_seed;
    prov["version"] = bundle.provenance.version;
    prov["timestamp"] = bundle.provenance.timestamp;
    doc["provenance"] = prov;
    json reports = json::array();
    for (const auto& r : bundle.reports) {
        json j;
        j["suite"] = r.suite;
        j["statistic"] = number_or_null(r.statistic);
        j["threshold"] = number_or_null(r.threshold);
        j["n_paths"] = r.n_paths;
        j["n_steps"] = r.n_steps;
        j["seed"] = r.seed.to_string();
        j["pass"] = r.pass;
        j["detail"] = r.detail;
        reports.push_back(std::move(j));
    }
    doc["reports"] = reports;
    return doc.dump(2) + "\n";
}

std::string render_csv(const ReportBundle& bundle) {
    std::string out = "suite,statistic,threshold,n_paths,n_steps,seed,pass\n";
    for (const auto& r : bundle.reports) {
        out += csv_field(r.suite) + "," + fmt(r.statistic) + "," + fmt(r.threshold) + "," +
               std::to_string(r.n_paths) + "," + std::to_string(r.n_steps) + "," + csv_field(r.seed.to_string()) +
               "," + (r.pass ? "true" : "false") + "\n";
    }
    return out;
}

std::string render_curve_csv(const CurveFile& curve) {
    std::string out = "t,value,series\n";
    for (const auto& s : curve.series)
        for (std::size_t i = 0; i < s.t.size(); ++i)
            out += fmt(s.t[i]) + "," + fmt(s.value[i]) + "," + csv_field(s.series) + "\n";
    return out;
}

std::filesystem::path emit_report(const ReportBundle& bundle, ReportFormat format,
                                  const std::filesystem::path& destination) {
    std::error_code ec;
    std::filesystem::create_directories(destination, ec);
    if (ec || !std::filesystem::is_directory(destination))
        throw IoError("cannot create output directory " + destination.string());
    const auto main = destination / (format == ReportFormat::json ? "report.json" : "report.csv");
    write_file(main, format == ReportFormat::json ? render_json(bundle) : render_csv(bundle));
    for (const auto& c : bundle.curves) write_file(destination / (c.name + ".csv"), render_curve_csv(c));
    return main;
}

SeedSpec parse_seed(const std::string& s) {
    const auto a = s.find('/');
    const auto b = s.rfind('/');
    if (a == std::string::npos || a == b) throw std::invalid_argument("malformed seed '" + s + "'");
    SeedSpec out;
    out.master_seed = std::stoull(s.substr(0, a));
    out.stream_label = s.substr(a + 1, b - a - 1);
    out.path_index = std::stoull(s.substr(b + 1));
    return out;
}

ReportBundle parse_report_json(const std::string& text) {
    const json doc = json::parse(text);
    ReportBundle b;
    const json& prov = doc.at("provenance");
    for (const auto& [k, v] : prov.at("config").items()) b.provenance.config.emplace_back(k, v.get<std::string>());
    b.provenance.master_seed = prov.at("master_seed").get<std::string>();
    b.provenance.version = prov.at("version").get<std::string>();
    b.provenance.timestamp = prov.at("timestamp").get<std::string>();
    for (const auto& j : doc.at("reports")) {
        TestReport r;
        r.suite = j.at("suite").get<std::string>();
        r.statistic = from_json_number(j.at("statistic"));
        r.threshold = from_json_number(j.at("threshold"));
        r.n_paths = j.at("n_paths").get<std::size_t>();
        r.n_steps = j.at("n_steps").get<std::size_t>();
        r.seed = parse_seed(j.at("seed").get<std::string>());
        r.pass = j.at("pass").get<bool>();
        r.detail = j.at("detail").get<std::string>();
        if (r.pass) r.status = ReportStatus::pass;
        else if (r.detail.rfind("hypothesis-not-met", 0) == 0) r.status = ReportStatus::hypothesis_not_met;
        else r.status = ReportStatus::fail;
        b.reports.push_back(std::move(r));
    }
    return b;
}

int exit_code(const ReportBundle& bundle) {
    bool fail = false, hyp = false;
    for (const auto& r : bundle.reports) {
        if (r.status == ReportStatus::hypothesis_not_met) hyp = true;
        else if (!r.pass) fail = true;
    }
    if (fail) return 1;
    if (hyp) return 3;
    return 0;
}

}  // namespace skewlab
