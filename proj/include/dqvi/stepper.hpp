#pragma once

#include "dqvi/history.hpp"
#include "dqvi/problem.hpp"
#include "dqvi/time_grid.hpp"
#include "dqvi/vi_solver.hpp"

#include <string>
#include <vector>

namespace dqvi {

enum class WearScheme { explicit_euler, backward_euler };
enum class DamageCoupling { semi_implicit, picard };

struct StepperConfig {
    double tol_outer = 1e-8;
    double tol_velocity = 1e-9;
    double tol_damage = 1e-10;
    /// Outer tolerance of the frozen-argument quasi-VI solve; its projection
    /// iterations run three decades tighter.
    double tol_inner = 1e-11;
    int max_picard = 300;
    WearScheme wear_scheme = WearScheme::backward_euler;
    DamageCoupling damage_source_coupling = DamageCoupling::semi_implicit;
    bool override_margin = false;
};

/// One accepted time node.
struct State {
    double t = 0.0;
    Vec u;
    Vec udot;
    Vec w;
    Vec zeta;
};

struct StepDiagnostics {
    int step = 0;
    int sweeps = 0;
    std::vector<double> sweep_changes;
    std::vector<double> ratios; // successive-change ratios, from the second sweep
    int velocity_iterations = 0;
    int quasi_vi_iterations = 0;
    bool converged = false;
};

struct VelocityResult {
    Vec udot;
    Vec u;
    int iterations = 0;
    int quasi_vi_iterations = 0;
    double final_residual = 0.0;
    bool converged = false;
    std::string failure;
};

struct StepResult {
    State state;
    StepDiagnostics diag;
};

struct Trajectory {
    TimeGrid grid;
    std::vector<State> states;
    std::vector<StepDiagnostics> diagnostics;
};

struct RunResult {
    Trajectory trajectory;
    bool ok = false;
    int failed_step = -1;
    std::string failure;
    ContractionConstants constants;
};

/// Fixed point of the shifted-load map of the velocity problem: the iterate
/// eta plays u̇_n, the displacement endpoint u_{n-1} + dt*eta feeds A and the
/// history quadrature, and the frozen-coupling quasi-VI is re-solved until the
/// loop settles. Throws StepFailureError on persistent non-contraction.
VelocityResult velocity_solve(const DqviProblem& p, const HistoryBuffer& buf,
                              const Vec& w_n, const Vec& zeta_n, int n,
                              const StepperConfig& cfg, const Vec& warm_udot);

/// One wear ODE step; backward Euler resolves its implicit fixed point and
/// requires dt * L_F < 1.
Vec wear_update(const DqviProblem& p, const Vec& w_prev, const Vec& udot_n, double t_n,
                double dt, WearScheme scheme);

/// Implicit-Euler parabolic VI for the damage field over the [0,1] box,
/// solved by projected SOR in the pivot metric.
Vec damage_solve(const DqviProblem& p, const Vec& zeta_prev, const Vec& u_n, double t_n,
                 double dt, const StepperConfig& cfg);

/// One Rothe step: outer Picard sweep velocity -> wear -> damage until the
/// largest successive-change norm drops below tol_outer. Appends the accepted
/// node to the buffer.
StepResult step(const DqviProblem& p, HistoryBuffer& buf, const State& prev,
                const StepperConfig& cfg);

RunResult run(const DqviProblem& p, const TimeGrid& grid, const StepperConfig& cfg);

} // namespace dqvi
