#include "dqvi/problem.hpp"

#include <cmath>

namespace dqvi {

DqviProblem make_validated(DqviProblem p, bool allow_infeasible_margin) {
    require(p.space_V && p.space_Y && p.space_W, "DqviProblem: missing space");
    require(p.op_A && p.op_B && p.op_C && p.op_F && p.op_phi && p.forcing,
            "DqviProblem: missing operator handle");
    require(p.K_V.project && p.K_Y.project, "DqviProblem: missing convex set");

    const ProblemConstants& c = p.constants;
    if (!(c.m_C > c.alpha1) && !allow_infeasible_margin)
        throw InfeasibleError("DqviProblem: smallness condition m_C > alpha_1 violated");
    require(c.T > 0.0, "DqviProblem: horizon T must be positive");
    require(c.a2 > 0.0, "DqviProblem: coercivity constant a2 must be positive");

    require(p.form_a.rows() == p.space_Y->dim() && p.form_a.cols() == p.space_Y->dim(),
            "DqviProblem: form_a dimension mismatch");
    const double scale = std::max(1.0, p.form_a.cwiseAbs().maxCoeff());
    require((p.form_a - p.form_a.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale,
            "DqviProblem: form_a must be symmetric");

    require(p.initial.u0.size() == p.space_V->dim(), "DqviProblem: u0 dimension mismatch");
    require(p.initial.w0.size() == p.space_W->dim(), "DqviProblem: w0 dimension mismatch");
    require(p.initial.zeta0.size() == p.space_Y->dim(),
            "DqviProblem: zeta0 dimension mismatch");
    const double u0_gap = p.space_V->norm_primary(p.K_V.project(p.initial.u0) - p.initial.u0);
    require(u0_gap <= 1e-10 * std::max(1.0, p.space_V->norm_primary(p.initial.u0)),
            "DqviProblem: u0 not feasible in K_V");
    const double z0_gap =
        (p.K_Y.project(p.initial.zeta0) - p.initial.zeta0).cwiseAbs().maxCoeff();
    require(z0_gap <= 1e-10, "DqviProblem: zeta0 not feasible in K_Y");

    return p;
}

ContractionConstants contraction_constants(const ProblemConstants& c) {
    if (!(c.m_C > c.alpha1))
        throw InfeasibleError("contraction_constants: requires m_C > alpha_1");
    const double margin = c.m_C - c.alpha1;
    const double growth = std::exp((2.0 * c.L_A * c.T + c.L_B * c.T * c.T) / (2.0 * margin));

    ContractionConstants out;
    out.c_p = c.alpha0 / margin;
    out.c_q = (c.L_A + c.L_B * c.T) * c.alpha0 / (margin * margin) * growth;
    const double t32 = c.T * std::sqrt(c.T);
    out.c_r = c.L_B * std::sqrt(c.T) / margin +
              2.0 * c.L_B * t32 * (c.L_A + c.L_B * c.T) / (3.0 * margin * margin) * growth;
    return out;
}

} // namespace dqvi
