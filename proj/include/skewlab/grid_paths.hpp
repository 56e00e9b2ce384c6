#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace skewlab {

// Uniform time grid t_i = i * horizon / n_steps.
struct TimeGrid {
    double horizon = 1.0;
    std::size_t n_steps = 1;
    std::vector<double> times;

    double dt() const { return horizon / static_cast<double>(n_steps); }
    std::size_t size() const { return times.size(); }
    // Largest grid index with t_i <= t (clamped to [0, n_steps]).
    std::size_t index_at(double t) const;
    // Smallest grid index with t_i >= t (clamped to [0, n_steps]).
    std::size_t first_index_at_or_after(double t) const;
};

using GridPtr = std::shared_ptr<const TimeGrid>;

GridPtr make_grid(double horizon, std::size_t n_steps);

bool same_grid(const TimeGrid& a, const TimeGrid& b);

struct SamplePath {
    GridPtr grid;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
    double& operator[](std::size_t i) { return values[i]; }
    double time(std::size_t i) const { return grid->times[i]; }
    double terminal() const { return values.back(); }
};

SamplePath make_path(GridPtr grid, std::vector<double> values);
SamplePath constant_path(GridPtr grid, double value);
// Throws std::invalid_argument unless both paths live on the same grid.
void require_aligned(const SamplePath& a, const SamplePath& b, const char* where);
// Throws std::invalid_argument if the path is not well formed or has non-finite values.
void validate_path(const SamplePath& p);

struct SeedSpec {
    std::uint64_t master_seed = 0;
    std::string stream_label = "main";
    std::uint64_t path_index = 0;

    SeedSpec child(const std::string& suffix) const;
    SeedSpec with_index(std::uint64_t index) const;
    std::string to_string() const;
};

bool operator==(const SeedSpec& a, const SeedSpec& b);

// Substream key:
//   k0 = splitmix64(master_seed)
//   k1 = splitmix64(k0 ^ fnv1a64(stream_label))
//   key = splitmix64(k1 + 0x9e3779b97f4a7c15 * (path_index + 1))
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(const std::string& s);
std::uint64_t substream_key(const SeedSpec& seed);

// Counter-based uniform in [0, 1) keyed by (key, a, b).
double hash_uniform(std::uint64_t key, std::uint64_t a, std::uint64_t b);

using Engine = std::mt19937_64;
Engine make_engine(const SeedSpec& seed);

// Fills out with iid N(0, 1) draws (Boost ziggurat).
void fill_standard_normal(Engine& eng, double* out, std::size_t n);

SamplePath sample_brownian(GridPtr grid, const SeedSpec& seed, double x0 = 0.0);

std::pair<SamplePath, SamplePath> sample_independent_pair(GridPtr grid, const SeedSpec& seed);

// Stream labels used by sample_independent_pair for its two components.
SeedSpec pair_component_seed(const SeedSpec& seed, int component);

// Brownian-bridge midpoint refinement, one dyadic level at a time. Level l draws
// from seed.child("bridge<l>"), so refine(p, 2^a) equals refine(p, 2^b) restricted
// to every 2^(b-a)-th index.
SamplePath refine_bridge(const SamplePath& path, std::size_t factor, const SeedSpec& seed);

// Every stride-th value on a coarser grid with the same horizon.
SamplePath restrict_path(const SamplePath& path, std::size_t stride);

}  // namespace skewlab
