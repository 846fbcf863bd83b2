#include "dqvi/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dqvi {

VelocityResult velocity_solve(const DqviProblem& p, const HistoryBuffer& buf,
                              const Vec& w_n, const Vec& zeta_n, int n,
                              const StepperConfig& cfg, const Vec& warm_udot) {
    require(n >= 1, "velocity_solve: step index must be >= 1");
    require(buf.length() >= n, "velocity_solve: previous states not accepted");
    const DiscreteSpace& V = *p.space_V;
    const double dt = buf.grid().dt();
    const double t_n = buf.grid().t(n);
    const Vec& u_prev = buf.u(n - 1);

    QuasiViInstance qvi;
    qvi.op.apply = [&p, t_n](const Vec& v) { return p.op_C(t_n, v); };
    qvi.op.m = p.constants.m_C;
    qvi.op.lipschitz = std::max(p.constants.L_C1, p.constants.m_C);
    qvi.j = p.j;
    qvi.w = w_n;
    qvi.set = p.K_V;
    qvi.space = p.space_V;

    VelocityResult result;
    Vec eta = warm_udot;
    double prev_diff = -1.0;
    int rising = 0;
    for (int k = 1; k <= cfg.max_picard; ++k) {
        const Vec u_cand = u_prev + dt * eta;
        const Vec hist = history_term_with_endpoint(buf, p.op_B, n, u_cand, zeta_n);
        qvi.rhs = p.forcing(t_n) - p.op_A(t_n, u_cand) - hist;
        QuasiSolveReport rep = solve_quasi_vi(qvi, cfg.tol_inner, cfg.max_picard, &eta);
        result.quasi_vi_iterations += rep.inner_iterations_total;
        if (rep.contraction_failure) {
            result.failure = "quasi-VI coupling loop not contracting: " + rep.message;
            result.udot = std::move(rep.solution);
            result.u = u_prev + dt * result.udot;
            result.iterations = k;
            return result;
        }
        const double diff = V.norm_primary(rep.solution - eta);
        eta = std::move(rep.solution);
        result.iterations = k;
        result.final_residual = diff;
        if (diff <= cfg.tol_velocity) {
            result.converged = true;
            break;
        }
        if (prev_diff > 0.0) {
            rising = diff >= prev_diff ? rising + 1 : 0;
            if (rising >= 5) {
                std::ostringstream os;
                const double margin = p.constants.m_C - p.constants.alpha1;
                os << "velocity Picard loop not contracting; reduce the time step "
                   << "(Lemma-type factor (L_A + T L_B)/(m_C - alpha_1) = "
                   << (p.constants.L_A + p.constants.T * p.constants.L_B) /
                          (margin > 0.0 ? margin : 1e-300)
                   << ")";
                result.failure = os.str();
                break;
            }
        }
        prev_diff = diff;
    }
    if (!result.converged && result.failure.empty())
        result.failure = "velocity Picard budget exhausted";
    result.udot = std::move(eta);
    result.u = u_prev + dt * result.udot;
    return result;
}

Vec wear_update(const DqviProblem& p, const Vec& w_prev, const Vec& udot_n, double t_n,
                double dt, WearScheme scheme) {
    if (scheme == WearScheme::explicit_euler)
        return w_prev + dt * p.op_F(t_n, w_prev, udot_n);

    // Backward Euler: w = w_prev + dt F(t_n, w, udot), a contraction for
    // dt * L_F < 1.
    if (dt * p.constants.L_F >= 1.0) {
        std::ostringstream os;
        os << "wear backward-Euler fixed point not contractive: dt*L_F = "
           << dt * p.constants.L_F << " >= 1; reduce the time step";
        throw StepFailureError(os.str());
    }
    const DiscreteSpace& W = *p.space_W;
    Vec w = w_prev;
    double prev_diff = -1.0;
    int rising = 0;
    for (int k = 0; k < 500; ++k) {
        Vec next = w_prev + dt * p.op_F(t_n, w, udot_n);
        const double diff = W.norm_primary(next - w);
        w = std::move(next);
        if (diff <= 1e-14 * std::max(1.0, W.norm_primary(w))) return w;
        if (prev_diff > 0.0) {
            rising = diff >= prev_diff ? rising + 1 : 0;
            if (rising >= 5)
                throw StepFailureError(
                    "wear backward-Euler iteration diverging; reduce the time step");
        }
        prev_diff = diff;
    }
    return w;
}

Vec damage_solve(const DqviProblem& p, const Vec& zeta_prev, const Vec& u_n, double t_n,
                 double dt, const StepperConfig& cfg) {
    const DiscreteSpace& Y = *p.space_Y;
    const Mat& M = Y.gram_pivot();
    const Mat Q = M + dt * p.form_a;
    for (int i = 0; i < Q.rows(); ++i)
        if (!(Q(i, i) > 0.0))
            throw StepFailureError("damage system lost positivity; reduce the time step");

    auto solve_qp = [&](const Vec& phi_hat, const Vec& start) {
        const Vec b = M * (zeta_prev + dt * phi_hat);
        Vec zeta = project_unit_interval(start);
        // Projected SOR on the box QP; the implicit-Euler VI is its KKT system.
        for (int sweep = 0; sweep < 100000; ++sweep) {
            double change = 0.0;
            for (int i = 0; i < zeta.size(); ++i) {
                const double r = b[i] - Q.row(i).dot(zeta) + Q(i, i) * zeta[i];
                const double zi = std::clamp(r / Q(i, i), 0.0, 1.0);
                change = std::max(change, std::abs(zi - zeta[i]));
                zeta[i] = zi;
            }
            if (change <= 0.02 * cfg.tol_damage) return zeta;
        }
        throw StepFailureError("damage projected-SOR iteration budget exhausted");
    };

    if (cfg.damage_source_coupling == DamageCoupling::semi_implicit)
        return solve_qp(p.op_phi(t_n, u_n, zeta_prev), zeta_prev);

    // Picard coupling: the source is re-evaluated at the new damage iterate
    // until the composite fixed point settles.
    Vec zeta = zeta_prev;
    for (int k = 0; k < cfg.max_picard; ++k) {
        Vec next = solve_qp(p.op_phi(t_n, u_n, zeta), zeta);
        const double diff = Y.norm_pivot(next - zeta);
        zeta = std::move(next);
        if (diff <= cfg.tol_damage) return zeta;
    }
    throw StepFailureError("damage Picard coupling budget exhausted");
}

StepResult step(const DqviProblem& p, HistoryBuffer& buf, const State& prev,
                const StepperConfig& cfg) {
    const int n = buf.length();
    require(n >= 1, "step: buffer must hold the initial node");
    const double dt = buf.grid().dt();
    const double t_n = buf.grid().t(n);

    StepResult result;
    result.diag.step = n;

    Vec udot = prev.udot;
    Vec w = prev.w;
    Vec zeta = prev.zeta;
    Vec u = prev.u;

    double prev_change = -1.0;
    int rising = 0;
    bool accepted = false;
    for (int sweep = 1; sweep <= cfg.max_picard; ++sweep) {
        VelocityResult vel = velocity_solve(p, buf, w, zeta, n, cfg, udot);
        if (!vel.converged) throw StepFailureError("step " + std::to_string(n) + ": " +
                                                   vel.failure);
        Vec w_new = wear_update(p, prev.w, vel.udot, t_n, dt, cfg.wear_scheme);
        Vec zeta_new = damage_solve(p, prev.zeta, vel.u, t_n, dt, cfg);

        const double dv = p.space_V->norm_primary(vel.udot - udot);
        const double dw = p.space_W->norm_primary(w_new - w);
        const double dz = p.space_Y->norm_pivot(zeta_new - zeta);
        const double change = std::max({dv, dw, dz});

        udot = std::move(vel.udot);
        u = std::move(vel.u);
        w = std::move(w_new);
        zeta = std::move(zeta_new);

        result.diag.sweeps = sweep;
        result.diag.velocity_iterations += vel.iterations;
        result.diag.quasi_vi_iterations += vel.quasi_vi_iterations;
        result.diag.sweep_changes.push_back(change);
        if (sweep >= 2 && prev_change > 0.0)
            result.diag.ratios.push_back(change / prev_change);

        if (change <= cfg.tol_outer) {
            accepted = true;
            break;
        }
        if (prev_change > 0.0) {
            rising = change >= prev_change ? rising + 1 : 0;
            if (rising >= 5) {
                std::ostringstream os;
                os << "step " << n << ": outer coupling sweep not contracting";
                try {
                    const ContractionConstants cc = contraction_constants(p.constants);
                    os << " (c_p=" << cc.c_p << ", c_q=" << cc.c_q << ", c_r=" << cc.c_r;
                } catch (const InfeasibleError&) {
                    os << " (m_C <= alpha_1";
                }
                os << ", dt*L_F=" << dt * p.constants.L_F << ")";
                throw StepFailureError(os.str());
            }
        }
        prev_change = change;
    }
    if (!accepted)
        throw StepFailureError("step " + std::to_string(n) + ": outer sweep budget exhausted");

    result.diag.converged = true;
    result.state = State{t_n, u, udot, w, zeta};
    buf.append(result.state.u, result.state.zeta);
    return result;
}

RunResult run(const DqviProblem& p, const TimeGrid& grid, const StepperConfig& cfg) {
    RunResult out;
    out.trajectory.grid = grid;
    if (!(p.constants.m_C > p.constants.alpha1)) {
        if (!cfg.override_margin) {
            out.failure = "Theorem margin violated: m_C <= alpha_1 (use the override to "
                          "step anyway)";
            out.failed_step = 0;
            return out;
        }
    } else {
        out.constants = contraction_constants(p.constants);
    }

    State initial;
    initial.t = 0.0;
    initial.u = p.initial.u0;
    initial.udot = Vec::Zero(p.space_V->dim());
    initial.w = p.initial.w0;
    initial.zeta = p.initial.zeta0;
    out.trajectory.states.push_back(initial);

    HistoryBuffer buf(grid, p.space_V->dim(), p.space_Y->dim());
    buf.append(initial.u, initial.zeta);

    for (int n = 1; n <= grid.N; ++n) {
        try {
            StepResult r = step(p, buf, out.trajectory.states.back(), cfg);
            out.trajectory.states.push_back(r.state);
            out.trajectory.diagnostics.push_back(r.diag);
        } catch (const StepFailureError& e) {
            out.failed_step = n;
            out.failure = e.what();
            return out;
        }
    }
    out.ok = true;
    return out;
}

} // namespace dqvi
