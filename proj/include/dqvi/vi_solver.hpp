#pragma once

#include "dqvi/jspec.hpp"
#include "dqvi/spaces.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace dqvi {

/// Operator handle with its declared strong-monotonicity and Lipschitz
/// constants, both measured in the primary metric of the hosting space.
struct ViOperator {
    std::function<Vec(const Vec&)> apply;
    double m = 0.0;
    std::optional<double> lipschitz;
};

/// One elliptic VI: find u in `set` with
///   <op(u) - rhs, v - u> + phi(v) - phi(u) >= 0  for all v in set.
/// phi enters either through its prox (nonsmooth case) or through a constant
/// gradient load array (linear case); both may be absent (phi == 0).
struct ViInstance {
    ViOperator op;
    std::function<Vec(const Vec& point, double step)> phi_prox;
    std::optional<Vec> phi_gradient;
    Vec rhs;
    ConvexSet set;
    std::shared_ptr<const DiscreteSpace> space;
};

struct SolveReport {
    Vec solution;
    int iterations = 0;
    double final_residual = 0.0;
    bool converged = false;
    double contraction_estimate = 0.0;
    double step_size = 0.0;
    double lipschitz_used = 0.0;
    bool lipschitz_estimated = false;
};

/// Projected forward-backward iteration with fixed step tau = m / L^2:
///   u <- P( prox_tau( u - tau G^{-1}(op(u) + grad_phi - rhs) ) ).
/// Stops when the metric-norm fixed-point residual drops below tol.
SolveReport solve_vi(const ViInstance& inst, double tol, int max_iter,
                     const Vec* warm_start = nullptr);

/// Quasi-VI of Problem 3.1: the second slot of j is frozen at the current
/// iterate and the resulting VI re-solved until the outer fixed point settles.
struct QuasiViInstance {
    ViOperator op;
    JSpec j;
    Vec w;
    Vec rhs;
    ConvexSet set;
    std::shared_ptr<const DiscreteSpace> space;
};

struct QuasiSolveReport {
    Vec solution;
    int outer_iterations = 0;
    int inner_iterations_total = 0;
    double final_residual = 0.0;
    bool converged = false;
    /// Set when successive-residual ratios stayed >= 1 for five iterations,
    /// the empirical signature of m_C <= alpha_1.
    bool contraction_failure = false;
    std::vector<double> residual_history;
    std::string message;
};

QuasiSolveReport solve_quasi_vi(const QuasiViInstance& inst, double tol, int max_iter,
                                const Vec* warm_start = nullptr);

} // namespace dqvi
