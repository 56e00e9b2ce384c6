#include "skewlab/signflip.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace skewlab {

AlphaSchedule AlphaSchedule::constant(double alpha) {
    AlphaSchedule s;
    s.boundaries = {0.0};
    s.values = {alpha};
    s.piecewise = false;
    s.validate();
    return s;
}

AlphaSchedule AlphaSchedule::piecewise_constant(std::vector<double> boundaries,
                                                std::vector<double> values) {
    AlphaSchedule s;
    s.boundaries = std::move(boundaries);
    s.values = std::move(values);
    s.piecewise = true;
    s.validate();
    return s;
}

void AlphaSchedule::validate() const {
    if (boundaries.empty() || boundaries.size() != values.size())
        throw std::invalid_argument("AlphaSchedule: need one alpha value per boundary");
    if (boundaries.front() != 0.0) throw std::invalid_argument("AlphaSchedule: first boundary must be 0");
    for (std::size_t i = 1; i < boundaries.size(); ++i)
        if (!(boundaries[i] > boundaries[i - 1]))
            throw std::invalid_argument("AlphaSchedule: boundaries must be strictly increasing");
    for (double a : values)
        if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("AlphaSchedule: alpha outside [0, 1]");
}

std::size_t AlphaSchedule::cell_of(double t) const {
    auto it = std::upper_bound(boundaries.begin(), boundaries.end(), t);
    if (it == boundaries.begin()) return 0;
    return static_cast<std::size_t>(it - boundaries.begin()) - 1;
}

SignAssignment assign_signs(const ExcursionSet& excursions, const TimeGrid& grid,
                            const AlphaSchedule& schedule, const SeedSpec& seed, SignRule rule) {
    schedule.validate();
    const std::uint64_t key = substream_key(seed.child("signs"));
    SignAssignment out;
    out.rule = rule;
    out.signs.resize(excursions.intervals.size());
    out.first_cell.resize(excursions.intervals.size());
    for (std::size_t n = 0; n < excursions.intervals.size(); ++n) {
        const Excursion& e = excursions.intervals[n];
        if (e.last >= grid.size()) throw std::invalid_argument("assign_signs: excursion outside grid");
        const std::size_t c0 = schedule.cell_of(grid.times[e.first]);
        const std::size_t c1 =
            (schedule.piecewise && rule == SignRule::split) ? schedule.cell_of(grid.times[e.last]) : c0;
        out.first_cell[n] = c0;
        for (std::size_t c = c0; c <= c1; ++c) {
            const double u = hash_uniform(key, n, c);
            out.signs[n].push_back(u < schedule.values[c] ? 1 : -1);
        }
    }
    return out;
}

SamplePath build_sign_path(const ExcursionSet& excursions, const SignAssignment& assignment,
                           const AlphaSchedule& schedule, GridPtr grid) {
    if (!grid || excursions.zero_mask.size() != grid->size())
        throw std::invalid_argument("build_sign_path: excursions do not match grid");
    if (assignment.signs.size() != excursions.intervals.size() ||
        assignment.first_cell.size() != excursions.intervals.size())
        throw std::invalid_argument("build_sign_path: assignment does not match excursions");
    const bool split = schedule.piecewise && assignment.rule == SignRule::split;

    std::vector<double> z(grid->size(), 0.0);
    for (std::size_t n = 0; n < excursions.intervals.size(); ++n) {
        const Excursion& e = excursions.intervals[n];
        const auto& s = assignment.signs[n];
        if (s.empty()) throw std::invalid_argument("build_sign_path: excursion without a sign");
        if (!split) {
            if (s.size() != 1) throw std::invalid_argument("build_sign_path: expected one sign per excursion");
            std::fill(z.begin() + e.first, z.begin() + e.last + 1, static_cast<double>(s[0]));
            continue;
        }
        const std::size_t c0 = assignment.first_cell[n];
        if (s.size() != schedule.cell_of(grid->times[e.last]) - c0 + 1)
            throw std::invalid_argument("build_sign_path: sign count does not match cell pieces");
        for (std::size_t j = e.first; j <= e.last; ++j)
            z[j] = static_cast<double>(s[schedule.cell_of(grid->times[j]) - c0]);
    }
    return make_path(std::move(grid), std::move(z));
}

SamplePath apply_sign(const SamplePath& sign, const SamplePath& path, SignMode mode) {
    require_aligned(sign, path, "apply_sign");
    std::vector<double> v(path.size());
    if (mode == SignMode::signed_product) {
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = sign.values[i] * path.values[i];
    } else {
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = sign.values[i] * std::fabs(path.values[i]);
    }
    return SamplePath{path.grid, std::move(v)};
}

}  // namespace skewlab
