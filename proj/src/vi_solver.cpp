#include "dqvi/vi_solver.hpp"

#include <cmath>
#include <random>

namespace dqvi {

namespace {

/// Fallback Lipschitz estimate from random difference quotients.
double estimate_lipschitz(const ViOperator& op, const DiscreteSpace& space,
                          const Vec& around) {
    std::mt19937_64 rng(0x5eedULL);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    const int dim = space.dim();
    double worst = 0.0;
    for (int s = 0; s < 24; ++s) {
        Vec a(dim), b(dim);
        for (int i = 0; i < dim; ++i) {
            a[i] = around.size() == dim ? around[i] + unif(rng) : unif(rng);
            b[i] = around.size() == dim ? around[i] + unif(rng) : unif(rng);
        }
        const double den = space.norm_primary(a - b);
        if (den < 1e-14) continue;
        worst = std::max(worst, space.dual_norm(op.apply(a) - op.apply(b)) / den);
    }
    return worst;
}

} // namespace

SolveReport solve_vi(const ViInstance& inst, double tol, int max_iter,
                     const Vec* warm_start) {
    require(tol > 0.0, "solve_vi: tolerance must be positive");
    require(inst.space != nullptr, "solve_vi: null space");
    require(inst.op.m > 0.0, "solve_vi: declared m must be positive");
    const DiscreteSpace& space = *inst.space;
    require(inst.rhs.size() == space.dim(), "solve_vi: rhs dimension mismatch");

    SolveReport report;
    double lipschitz;
    if (inst.op.lipschitz.has_value()) {
        lipschitz = *inst.op.lipschitz;
        require(lipschitz >= inst.op.m, "solve_vi: L must be >= m");
    } else {
        lipschitz = 1.5 * estimate_lipschitz(inst.op, space,
                                             warm_start ? *warm_start : Vec());
        lipschitz = std::max(lipschitz, inst.op.m);
        report.lipschitz_estimated = true;
    }
    const double tau = inst.op.m / (lipschitz * lipschitz);
    if (!(tau > 0.0)) throw InvalidInputError("solve_vi: step tau must be positive");
    report.step_size = tau;
    report.lipschitz_used = lipschitz;

    Vec u = warm_start ? inst.set.project(*warm_start)
                       : inst.set.project(Vec::Zero(space.dim()));
    double prev_residual = -1.0;
    for (int k = 1; k <= max_iter; ++k) {
        Vec grad = inst.op.apply(u) - inst.rhs;
        if (inst.phi_gradient) grad += *inst.phi_gradient;
        Vec y = u - tau * space.riesz(grad);
        if (inst.phi_prox) y = inst.phi_prox(y, tau);
        Vec next = inst.set.project(y);
        const double residual = space.norm_primary(next - u);
        if (prev_residual > 0.0) report.contraction_estimate = residual / prev_residual;
        prev_residual = residual;
        u = std::move(next);
        report.iterations = k;
        report.final_residual = residual;
        if (residual <= tol) {
            report.converged = true;
            break;
        }
    }
    report.solution = std::move(u);
    return report;
}

QuasiSolveReport solve_quasi_vi(const QuasiViInstance& inst, double tol, int max_iter,
                                const Vec* warm_start) {
    require(tol > 0.0, "solve_quasi_vi: tolerance must be positive");
    require(inst.space != nullptr, "solve_quasi_vi: null space");
    const DiscreteSpace& space = *inst.space;

    ViInstance inner;
    inner.op = inst.op;
    inner.rhs = inst.rhs;
    inner.set = inst.set;
    inner.space = inst.space;

    const double inner_tol = std::max(tol * 1e-3, 1e-15);
    const bool linear = inst.j.linear_in_v && inst.j.gradient_in_v;
    if (!linear && !inst.j.prox)
        throw InvalidInputError("solve_quasi_vi: j needs linear_in_v gradient or a prox");

    QuasiSolveReport report;
    Vec u = warm_start ? inst.set.project(*warm_start)
                       : inst.set.project(Vec::Zero(space.dim()));
    int rising = 0;
    double prev_residual = -1.0;
    for (int k = 1; k <= max_iter; ++k) {
        const Vec z = inst.j.trace ? inst.j.trace(u) : u;
        if (linear) {
            inner.phi_gradient = inst.j.gradient_in_v(inst.w, z);
        } else {
            inner.phi_prox = [&inst, z](const Vec& point, double step) {
                return inst.j.prox(inst.w, z, point, step);
            };
        }
        SolveReport inner_report = solve_vi(inner, inner_tol, 100000, &u);
        report.inner_iterations_total += inner_report.iterations;
        const double residual = space.norm_primary(inner_report.solution - u);
        report.residual_history.push_back(residual);
        u = std::move(inner_report.solution);
        report.outer_iterations = k;
        report.final_residual = residual;
        if (residual <= tol) {
            report.converged = true;
            break;
        }
        if (prev_residual > 0.0) {
            rising = residual >= prev_residual ? rising + 1 : 0;
            if (rising >= 5) {
                report.contraction_failure = true;
                report.message =
                    "outer fixed point not contracting: residual ratios >= 1 over 5 "
                    "consecutive iterations (empirically m_C <= alpha_1)";
                break;
            }
        }
        prev_residual = residual;
    }
    report.solution = std::move(u);
    if (!report.converged && report.message.empty())
        report.message = "outer iteration budget exhausted";
    return report;
}

} // namespace dqvi
