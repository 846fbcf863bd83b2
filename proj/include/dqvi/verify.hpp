#pragma once

#include "dqvi/stepper.hpp"
#include "dqvi/types.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace dqvi {
namespace verify {

/// Tiny symmetric VI instance whose ground truth is a quadratic program:
/// operator x -> Q x, right-hand side rhs, box lo <= x <= hi (entries may be
/// +-infinity for half-space or free coordinates), optional extra convex term
/// evaluated pointwise.
struct OracleInstance {
    Mat Q;
    Vec rhs;
    Vec lo;
    Vec hi;
    std::function<double(const Vec&)> extra_term;
};

/// Dense grid minimization of 0.5 x'Qx - rhs'x + extra(x) over the set,
/// followed by one per-coordinate refinement pass on a fine local grid.
/// Accuracy <= 2 * (box width / grid_points). Q must be positive definite.
Vec brute_force_vi(const OracleInstance& inst, int grid_points);

struct ContractionTrace {
    std::vector<double> ratios;
    bool landed_on_fixed_point = false;
};

/// Ratios ||x_{k+1} - x_k|| / ||x_k - x_{k-1}|| of a self-map iteration; the
/// sequence is truncated and flagged when the iteration lands exactly on its
/// fixed point.
ContractionTrace measure_contraction(const std::function<Vec(const Vec&)>& map,
                                     const Vec& start, int iterations);

struct ManufacturedReference {
    Trajectory trajectory; // sampled back on the coarse grid nodes
    bool valid = false;
    std::string message;
};

/// High-resolution reference for convergence studies: the same scheme run at
/// dt/refinement. Invalid when any constraint activates during the reference
/// run (the closed-form linear reduction would not apply).
ManufacturedReference manufactured_linear_oracle(const DqviProblem& p, const TimeGrid& grid,
                                                 const StepperConfig& cfg,
                                                 int refinement = 64);

} // namespace verify
} // namespace dqvi
