#pragma once

#include "skewlab/grid_paths.hpp"

#include <cstdint>
#include <vector>

namespace skewlab {

// One flag per grid index.
using ZeroMask = std::vector<std::uint8_t>;

// Excursion ]g, d[ with interior grid indices first..last (inclusive).
// A strict sign change between i and i+1 ends an excursion at last = i, d = i+1
// and starts the next at g = i, first = i+1. An excursion that is still open at
// the horizon has last = d = N. A path that starts away from zero has g = first = 0.
struct Excursion {
    std::size_t g_index = 0;
    std::size_t d_index = 0;
    std::size_t first = 0;
    std::size_t last = 0;
    int sign = 0;
};

struct ExcursionSet {
    std::vector<Excursion> intervals;
    // Indices where the path is exactly zero (after optional snapping).
    ZeroMask zero_mask;
    // zero_mask plus the first index after every strict sign change.
    // This is the discrete zero set used for gamma, gbar and carried-by checks.
    ZeroMask zero_set;
};

struct DecomposeOptions {
    // |x| <= snap_tolerance counts as an exact zero.
    double snap_tolerance = 0.0;
    // Take the zero structure from this path instead (e.g. B when decomposing |B|).
    const SamplePath* zero_reference = nullptr;
};

ExcursionSet decompose_excursions(const SamplePath& path, const DecomposeOptions& opts = {});

struct LastZeroCurve {
    std::vector<std::size_t> gamma;
    std::size_t gbar = 0;
};

LastZeroCurve last_zero_curve(const ExcursionSet& excursions);
LastZeroCurve last_zero_curve(const ZeroMask& zero_set);

// Mask widened by `radius` indices on each side.
ZeroMask dilate_mask(const ZeroMask& mask, std::size_t radius);

ZeroMask mask_union(const ZeroMask& a, const ZeroMask& b);

// True when every flagged index of `inner` is flagged in `outer`.
bool mask_contained(const ZeroMask& inner, const ZeroMask& outer);

}  // namespace skewlab
