#include "skewlab/excursion.hpp"

#include <cmath>
#include <stdexcept>

namespace skewlab {

namespace {

int snapped_sign(double x, double tol) {
    if (std::fabs(x) <= tol) return 0;
    return x > 0.0 ? 1 : -1;
}

}  // namespace

ExcursionSet decompose_excursions(const SamplePath& path, const DecomposeOptions& opts) {
    validate_path(path);
    const SamplePath& ref = opts.zero_reference ? *opts.zero_reference : path;
    if (opts.zero_reference) require_aligned(path, ref, "decompose_excursions");

    const std::size_t n = path.size();
    ExcursionSet out;
    out.zero_mask.assign(n, 0);
    out.zero_set.assign(n, 0);

    // Sign reported for an interval: the path's own sign when nonzero there,
    // otherwise the reference's.
    auto interval_sign = [&](std::size_t i, int ref_sign) {
        int s = snapped_sign(path.values[i], opts.snap_tolerance);
        return s != 0 ? s : ref_sign;
    };

    bool open = false;
    Excursion cur;
    int prev = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const int s = snapped_sign(ref.values[i], opts.snap_tolerance);
        if (s == 0) {
            out.zero_mask[i] = 1;
            out.zero_set[i] = 1;
            if (open) {
                cur.last = i - 1;
                cur.d_index = i;
                out.intervals.push_back(cur);
                open = false;
            }
        } else if (!open) {
            cur = Excursion{};
            cur.g_index = i == 0 ? 0 : i - 1;
            cur.first = i;
            cur.sign = interval_sign(i, s);
            open = true;
        } else if (s != prev) {
            cur.last = i - 1;
            cur.d_index = i;
            out.intervals.push_back(cur);
            out.zero_set[i] = 1;
            cur = Excursion{};
            cur.g_index = i - 1;
            cur.first = i;
            cur.sign = interval_sign(i, s);
        }
        prev = s;
    }
    if (open) {
        cur.last = n - 1;
        cur.d_index = n - 1;
        out.intervals.push_back(cur);
    }
    return out;
}

LastZeroCurve last_zero_curve(const ZeroMask& zero_set) {
    LastZeroCurve out;
    out.gamma.resize(zero_set.size());
    std::size_t last = 0;
    for (std::size_t i = 0; i < zero_set.size(); ++i) {
        if (zero_set[i]) last = i;
        out.gamma[i] = last;
    }
    out.gbar = last;
    return out;
}

LastZeroCurve last_zero_curve(const ExcursionSet& excursions) {
    return last_zero_curve(excursions.zero_set);
}

ZeroMask dilate_mask(const ZeroMask& mask, std::size_t radius) {
    const std::size_t n = mask.size();
    ZeroMask out(n, 0);
    // Distance to the nearest flagged index, swept from both sides.
    std::size_t since = radius + 1;
    for (std::size_t i = 0; i < n; ++i) {
        since = mask[i] ? 0 : since + 1;
        if (since <= radius) out[i] = 1;
    }
    since = radius + 1;
    for (std::size_t i = n; i-- > 0;) {
        since = mask[i] ? 0 : since + 1;
        if (since <= radius) out[i] = 1;
    }
    return out;
}

ZeroMask mask_union(const ZeroMask& a, const ZeroMask& b) {
    if (a.size() != b.size()) throw std::invalid_argument("mask_union: length mismatch");
    ZeroMask out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] || b[i]) ? 1 : 0;
    return out;
}

bool mask_contained(const ZeroMask& inner, const ZeroMask& outer) {
    if (inner.size() != outer.size()) throw std::invalid_argument("mask_contained: length mismatch");
    for (std::size_t i = 0; i < inner.size(); ++i)
        if (inner[i] && !outer[i]) return false;
    return true;
}

}  // namespace skewlab
