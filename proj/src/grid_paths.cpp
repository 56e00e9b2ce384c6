#include "skewlab/grid_paths.hpp"

#include <boost/random/normal_distribution.hpp>

#include <cmath>
#include <stdexcept>

namespace skewlab {

std::size_t TimeGrid::index_at(double t) const {
    if (t <= 0.0) return 0;
    if (t >= horizon) return n_steps;
    auto i = static_cast<std::size_t>(std::floor(t / dt() + 1e-9));
    return std::min(i, n_steps);
}

std::size_t TimeGrid::first_index_at_or_after(double t) const {
    if (t <= 0.0) return 0;
    if (t >= horizon) return n_steps;
    auto i = static_cast<std::size_t>(std::ceil(t / dt() - 1e-9));
    return std::min(i, n_steps);
}

GridPtr make_grid(double horizon, std::size_t n_steps) {
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw std::invalid_argument("make_grid: horizon must be positive");
    if (n_steps == 0) throw std::invalid_argument("make_grid: n_steps must be at least 1");
    auto g = std::make_shared<TimeGrid>();
    g->horizon = horizon;
    g->n_steps = n_steps;
    g->times.resize(n_steps + 1);
    const double n = static_cast<double>(n_steps);
    for (std::size_t i = 0; i <= n_steps; ++i) g->times[i] = horizon * (static_cast<double>(i) / n);
    g->times.back() = horizon;
    return g;
}

bool same_grid(const TimeGrid& a, const TimeGrid& b) {
    return &a == &b || (a.horizon == b.horizon && a.n_steps == b.n_steps);
}

SamplePath make_path(GridPtr grid, std::vector<double> values) {
    if (!grid) throw std::invalid_argument("make_path: null grid");
    if (values.size() != grid->size())
        throw std::invalid_argument("make_path: values do not match grid length");
    return SamplePath{std::move(grid), std::move(values)};
}

SamplePath constant_path(GridPtr grid, double value) {
    std::vector<double> v(grid->size(), value);
    return make_path(std::move(grid), std::move(v));
}

void require_aligned(const SamplePath& a, const SamplePath& b, const char* where) {
    if (!a.grid || !b.grid || !same_grid(*a.grid, *b.grid) || a.size() != b.size())
        throw std::invalid_argument(std::string(where) + ": grid mismatch");
}

void validate_path(const SamplePath& p) {
    if (!p.grid || p.values.size() != p.grid->size())
        throw std::invalid_argument("path length does not match its grid");
    for (double v : p.values)
        if (!std::isfinite(v)) throw std::invalid_argument("path contains a non-finite value");
}

SeedSpec SeedSpec::child(const std::string& suffix) const {
    return SeedSpec{master_seed, stream_label + "/" + suffix, path_index};
}

SeedSpec SeedSpec::with_index(std::uint64_t index) const {
    return SeedSpec{master_seed, stream_label, index};
}

std::string SeedSpec::to_string() const {
    return std::to_string(master_seed) + "/" + stream_label + "/" + std::to_string(path_index);
}

bool operator==(const SeedSpec& a, const SeedSpec& b) {
    return a.master_seed == b.master_seed && a.stream_label == b.stream_label &&
           a.path_index == b.path_index;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t substream_key(const SeedSpec& seed) {
    const std::uint64_t k0 = splitmix64(seed.master_seed);
    const std::uint64_t k1 = splitmix64(k0 ^ fnv1a64(seed.stream_label));
    return splitmix64(k1 + 0x9e3779b97f4a7c15ULL * (seed.path_index + 1));
}

double hash_uniform(std::uint64_t key, std::uint64_t a, std::uint64_t b) {
    std::uint64_t h = splitmix64(key ^ splitmix64(a));
    h = splitmix64(h ^ splitmix64(b + 0x632be59bd9b4e019ULL));
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

Engine make_engine(const SeedSpec& seed) { return Engine(substream_key(seed)); }

void fill_standard_normal(Engine& eng, double* out, std::size_t n) {
    boost::random::normal_distribution<double> nd(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) out[i] = nd(eng);
}

SamplePath sample_brownian(GridPtr grid, const SeedSpec& seed, double x0) {
    if (!grid) throw std::invalid_argument("sample_brownian: null grid");
    const std::size_t n = grid->n_steps;
    std::vector<double> v(n + 1);
    Engine eng = make_engine(seed);
    fill_standard_normal(eng, v.data() + 1, n);
    const double sd = std::sqrt(grid->dt());
    v[0] = x0;
    for (std::size_t i = 1; i <= n; ++i) v[i] = v[i - 1] + sd * v[i];
    return SamplePath{std::move(grid), std::move(v)};
}

SeedSpec pair_component_seed(const SeedSpec& seed, int component) {
    return seed.child(component == 0 ? "pair0" : "pair1");
}

std::pair<SamplePath, SamplePath> sample_independent_pair(GridPtr grid, const SeedSpec& seed) {
    return {sample_brownian(grid, pair_component_seed(seed, 0), 0.0),
            sample_brownian(grid, pair_component_seed(seed, 1), 0.0)};
}

SamplePath refine_bridge(const SamplePath& path, std::size_t factor, const SeedSpec& seed) {
    if (factor == 0 || (factor & (factor - 1)) != 0)
        throw std::invalid_argument("refine_bridge: factor must be a power of 2");
    validate_path(path);
    if (factor == 1) return path;

    std::vector<double> cur = path.values;
    std::size_t n = path.grid->n_steps;
    double h = path.grid->dt();
    std::vector<double> z;
    int level = 0;
    for (std::size_t f = 1; f < factor; f *= 2) {
        ++level;
        Engine eng = make_engine(seed.child("bridge" + std::to_string(level)));
        z.resize(n);
        fill_standard_normal(eng, z.data(), n);
        const double sd = std::sqrt(h / 4.0);
        std::vector<double> next(2 * n + 1);
        for (std::size_t i = 0; i < n; ++i) {
            next[2 * i] = cur[i];
            next[2 * i + 1] = 0.5 * (cur[i] + cur[i + 1]) + sd * z[i];
        }
        next[2 * n] = cur[n];
        cur.swap(next);
        n *= 2;
        h *= 0.5;
    }
    return make_path(make_grid(path.grid->horizon, n), std::move(cur));
}

SamplePath restrict_path(const SamplePath& path, std::size_t stride) {
    const std::size_t n = path.grid->n_steps;
    if (stride == 0 || n % stride != 0)
        throw std::invalid_argument("restrict_path: stride must divide n_steps");
    if (stride == 1) return path;
    std::vector<double> v(n / stride + 1);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = path.values[i * stride];
    return make_path(make_grid(path.grid->horizon, n / stride), std::move(v));
}

}  // namespace skewlab
