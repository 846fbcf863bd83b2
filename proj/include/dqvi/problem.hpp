#pragma once

#include "dqvi/jspec.hpp"
#include "dqvi/spaces.hpp"

#include <functional>
#include <memory>

namespace dqvi {

/// Lipschitz/monotonicity constants declared by the problem provider. The
/// framework audits them by sampling (see hypotheses.hpp) and consumes them in
/// step-size and contraction diagnostics; it never infers them.
struct ProblemConstants {
    double L_A = 0.0;
    double L_B = 0.0;
    double rho_bound = 0.0; // sup of the history-kernel growth bound rho(t)
    double L_C1 = 0.0;
    double L_C2 = 0.0;
    double m_C = 0.0;
    double alpha0 = 0.0;
    double alpha1 = 0.0;
    double L_F = 0.0;
    double L_phi = 0.0;
    double a1 = 0.0;
    double a2 = 0.0;
    double T = 0.0;
};

struct InitialData {
    Vec u0;
    Vec w0;
    Vec zeta0;
};

/// The full operator bundle of the coupled system: the wear ODE right-hand
/// side F, the history-dependent quasivariational inequality (A, B, C, j, f)
/// over K_V, and the parabolic damage inequality (phi, a) over K_Y.
struct DqviProblem {
    std::shared_ptr<const DiscreteSpace> space_V;
    std::shared_ptr<const DiscreteSpace> space_Y;
    std::shared_ptr<const DiscreteSpace> space_W;
    ConvexSet K_V;
    ConvexSet K_Y;

    std::function<Vec(double t, const Vec& u)> op_A;
    std::function<Vec(double lag, const Vec& u, const Vec& zeta)> op_B;
    std::function<Vec(double t, const Vec& v)> op_C;
    std::function<Vec(double t, const Vec& w, const Vec& v)> op_F;
    std::function<Vec(double t, const Vec& u, const Vec& zeta)> op_phi;
    Mat form_a;
    JSpec j;
    std::function<Vec(double t)> forcing;
    InitialData initial;
    ProblemConstants constants;
};

/// Construction gate: rejects m_C <= alpha_1 (unless explicitly allowed for
/// negative tests), infeasible initial data, asymmetric form_a, a2 <= 0.
/// Returns the problem unchanged on success.
DqviProblem make_validated(DqviProblem p, bool allow_infeasible_margin = false);

struct ContractionConstants {
    double c_p = 0.0;
    double c_q = 0.0;
    double c_r = 0.0;
};

/// Closed-form contraction constants of the wear and damage coupling loops,
/// evaluated at the horizon T. Throws InfeasibleError when m_C <= alpha_1.
ContractionConstants contraction_constants(const ProblemConstants& c);

} // namespace dqvi
