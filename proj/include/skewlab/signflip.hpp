#pragma once

#include "skewlab/excursion.hpp"
#include "skewlab/grid_paths.hpp"

#include <vector>

namespace skewlab {

// alpha(t) = values[i] on [boundaries[i], boundaries[i+1]) and values.back() on
// [boundaries.back(), T]. A constant schedule is the single cell [0, T].
struct AlphaSchedule {
    std::vector<double> boundaries{0.0};
    std::vector<double> values{0.5};
    bool piecewise = false;

    static AlphaSchedule constant(double alpha);
    static AlphaSchedule piecewise_constant(std::vector<double> boundaries, std::vector<double> values);

    void validate() const;
    std::size_t cell_count() const { return values.size(); }
    std::size_t cell_of(double t) const;
    double alpha_at(double t) const { return values[cell_of(t)]; }
};

// How a piecewise schedule acts on an excursion that spans several cells.
//  split:           one independent sign per excursion-cell piece, so the sign
//                   may change at a cell boundary inside the excursion.
//  hold_from_start: one sign per excursion, drawn with the alpha of the cell
//                   that contains the excursion's first interior index.
enum class SignRule { split, hold_from_start };

struct SignAssignment {
    SignRule rule = SignRule::split;
    // signs[n][k] is the sign of excursion n on its k-th cell piece
    // (a single entry under hold_from_start or for constant schedules).
    std::vector<std::vector<int>> signs;
    // Cell index of each excursion's first piece.
    std::vector<std::size_t> first_cell;
};

// Draw for (excursion n, cell c) is hash_uniform(substream_key(seed.child("signs")), n, c) < alpha_c.
SignAssignment assign_signs(const ExcursionSet& excursions, const TimeGrid& grid,
                            const AlphaSchedule& schedule, const SeedSpec& seed,
                            SignRule rule = SignRule::split);

SamplePath build_sign_path(const ExcursionSet& excursions, const SignAssignment& assignment,
                           const AlphaSchedule& schedule, GridPtr grid);

enum class SignMode { signed_product, absolute };

SamplePath apply_sign(const SamplePath& sign, const SamplePath& path, SignMode mode);

}  // namespace skewlab
