#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dqvi/builtin.hpp"
#include "dqvi/stepper.hpp"

#include <cmath>
#include <memory>
#include <random>

using namespace dqvi;

namespace {

std::shared_ptr<const DiscreteSpace> identity_space(SpaceLabel label, int dim = 1) {
    return std::make_shared<DiscreteSpace>(label, Mat::Identity(dim, dim),
                                           Mat::Identity(dim, dim));
}

/// 1-D instance A(t,u) = u, C(t,v) = 2v, B = 0, j = 0, f = 3, u0 = 0.
/// The step recursion is (2 + dt) udot_n = 3 - u_{n-1}; the continuous limit
/// solves udot = (3 - u)/2.
DqviProblem scalar_relaxation_problem() {
    DqviProblem p;
    p.space_V = identity_space(SpaceLabel::V);
    p.space_Y = identity_space(SpaceLabel::Y);
    p.space_W = identity_space(SpaceLabel::W);
    p.K_V = make_whole_space_set();
    p.K_Y = make_unit_interval_set();
    p.op_A = [](double, const Vec& u) { return u; };
    p.op_B = [](double, const Vec& u, const Vec&) { return (0.0 * u).eval(); };
    p.op_C = [](double, const Vec& v) { return (2.0 * v).eval(); };
    p.op_F = [](double, const Vec& w, const Vec&) { return (0.0 * w).eval(); };
    p.op_phi = [](double, const Vec&, const Vec& z) { return (0.0 * z).eval(); };
    p.form_a = Mat::Zero(1, 1);
    p.j = make_zero_jspec(1);
    p.forcing = [](double) { return Vec::Constant(1, 3.0); };
    p.initial.u0 = Vec::Zero(1);
    p.initial.w0 = Vec::Zero(1);
    p.initial.zeta0 = Vec::Constant(1, 0.5);
    p.constants.L_A = 1.0;
    p.constants.m_C = 2.0;
    p.constants.L_C1 = 2.0;
    p.constants.a1 = 1.0;
    p.constants.a2 = 1.0;
    p.constants.T = 1.0;
    return make_validated(p);
}

StepperConfig tight_config() {
    StepperConfig cfg;
    cfg.tol_outer = 1e-10;
    cfg.tol_velocity = 1e-12;
    cfg.tol_damage = 1e-12;
    cfg.tol_inner = 1e-13;
    return cfg;
}

State initial_state(const DqviProblem& p) {
    State s;
    s.t = 0.0;
    s.u = p.initial.u0;
    s.udot = Vec::Zero(p.space_V->dim());
    s.w = p.initial.w0;
    s.zeta = p.initial.zeta0;
    return s;
}

} // namespace

TEST_CASE("run: zero data stays at rest") {
    const DqviProblem p = make_builtin_problem("zero");
    const RunResult r = run(p, TimeGrid(1.0, 5), tight_config());
    REQUIRE(r.ok);
    for (const State& s : r.trajectory.states) {
        CHECK(s.u.norm() == 0.0);
        CHECK(s.udot.norm() == 0.0);
        CHECK(s.w.norm() == 0.0);
        CHECK((s.zeta - Vec::Constant(1, 0.5)).norm() <= 1e-12);
    }
}

TEST_CASE("velocity_solve: scalar recursion matches the hand value 3/2.1") {
    const DqviProblem p = scalar_relaxation_problem();
    const TimeGrid grid(1.0, 10); // dt = 0.1
    HistoryBuffer buf(grid, 1, 1);
    buf.append(p.initial.u0, p.initial.zeta0);
    const StepperConfig cfg = tight_config();
    const VelocityResult v = velocity_solve(p, buf, p.initial.w0, p.initial.zeta0, 1, cfg,
                                            Vec::Zero(1));
    REQUIRE(v.converged);
    CHECK(v.udot[0] == doctest::Approx(3.0 / 2.1).epsilon(1e-10));
    CHECK(v.u[0] == doctest::Approx(0.1 * 3.0 / 2.1).epsilon(1e-10));
}

TEST_CASE("velocity_solve: distant warm starts agree (uniqueness)") {
    const DqviProblem p = scalar_relaxation_problem();
    const TimeGrid grid(1.0, 10);
    HistoryBuffer buf(grid, 1, 1);
    buf.append(p.initial.u0, p.initial.zeta0);
    const StepperConfig cfg = tight_config();
    const VelocityResult a = velocity_solve(p, buf, p.initial.w0, p.initial.zeta0, 1, cfg,
                                            Vec::Constant(1, -100.0));
    const VelocityResult b = velocity_solve(p, buf, p.initial.w0, p.initial.zeta0, 1, cfg,
                                            Vec::Constant(1, 100.0));
    REQUIRE(a.converged);
    REQUIRE(b.converged);
    CHECK(std::abs(a.udot[0] - b.udot[0]) <= 2.0 * cfg.tol_velocity);
}

TEST_CASE("run: scalar problem converges to the relaxation ODE at first order") {
    const DqviProblem p = scalar_relaxation_problem();
    auto exact_u = [](double t) { return 3.0 * (1.0 - std::exp(-t / 2.0)); };
    double prev_err = -1.0;
    for (int N : {16, 32, 64}) {
        const RunResult r = run(p, TimeGrid(1.0, N), tight_config());
        REQUIRE(r.ok);
        double err = 0.0;
        for (const State& s : r.trajectory.states)
            err = std::max(err, std::abs(s.u[0] - exact_u(s.t)));
        if (prev_err > 0.0) {
            const double order = std::log2(prev_err / err);
            CHECK(order >= 0.9);
            CHECK(order <= 1.1);
        }
        prev_err = err;
    }
}

TEST_CASE("wear_update: zero rate keeps the wear constant") {
    const DqviProblem p = scalar_relaxation_problem();
    const Vec w = Vec::Constant(1, 0.7);
    CHECK((wear_update(p, w, Vec::Zero(1), 0.5, 0.1, WearScheme::explicit_euler) - w).norm() ==
          0.0);
    CHECK((wear_update(p, w, Vec::Zero(1), 0.5, 0.1, WearScheme::backward_euler) - w).norm() <=
          1e-14);
}

TEST_CASE("wear_update: explicit Euler reproduces the geometric decay") {
    DqviProblem p = scalar_relaxation_problem();
    p.op_F = [](double, const Vec& w, const Vec&) { return (-w).eval(); };
    p.constants.L_F = 1.0;
    Vec w = Vec::Constant(1, 1.0);
    for (int n = 0; n < 10; ++n)
        w = wear_update(p, w, Vec::Zero(1), 0.1 * (n + 1), 0.1, WearScheme::explicit_euler);
    CHECK(w[0] == doctest::Approx(std::pow(0.9, 10)).epsilon(1e-14));
    CHECK(w[0] == doctest::Approx(0.34867844010000004).epsilon(1e-14));
    // First-order accuracy against exp(-1).
    CHECK(std::abs(w[0] - std::exp(-1.0)) < 0.02);
}

TEST_CASE("wear_update: backward Euler solves its implicit fixed point") {
    DqviProblem p = scalar_relaxation_problem();
    p.op_F = [](double, const Vec& w, const Vec&) { return (-w).eval(); };
    p.constants.L_F = 1.0;
    const Vec w0 = Vec::Constant(1, 1.0);
    const Vec w1 = wear_update(p, w0, Vec::Zero(1), 0.1, 0.1, WearScheme::backward_euler);
    CHECK(w1[0] == doctest::Approx(1.0 / 1.1).epsilon(1e-12));

    // dt * L_F >= 1 is refused with a step-size hint.
    CHECK_THROWS_AS(wear_update(p, w0, Vec::Zero(1), 0.1, 1.5, WearScheme::backward_euler),
                    StepFailureError);
}

TEST_CASE("wear_update: nonnegative rate gives entrywise nondecreasing wear") {
    DqviProblem p = scalar_relaxation_problem();
    p.op_F = [](double, const Vec&, const Vec& v) { return v.cwiseMax(0.0).eval(); };
    p.constants.L_F = 1.0;
    Vec w = Vec::Zero(1);
    for (int n = 0; n < 5; ++n) {
        const Vec next =
            wear_update(p, w, Vec::Constant(1, std::sin(n + 1.0)), 0.1 * n, 0.1,
                        WearScheme::explicit_euler);
        CHECK(next[0] >= w[0]);
        w = next;
    }
}

TEST_CASE("damage_solve: uniform damage with zero source is stationary") {
    DqviProblem p = scalar_relaxation_problem();
    // Two-node Y space with a stiffness-like form that annihilates constants.
    p.space_Y = identity_space(SpaceLabel::Y, 2);
    p.op_phi = [](double, const Vec&, const Vec&) { return Vec::Zero(2); };
    Mat a(2, 2);
    a << 1.0, -1.0, -1.0, 1.0;
    p.form_a = a;
    p.initial.zeta0 = Vec::Constant(2, 0.4);
    p = make_validated(p);
    const Vec z = damage_solve(p, p.initial.zeta0, Vec::Zero(1), 0.3, 0.2, tight_config());
    CHECK((z - p.initial.zeta0).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("damage_solve: uniform unit source ramps and saturates at 1") {
    DqviProblem p = scalar_relaxation_problem();
    p.space_Y = identity_space(SpaceLabel::Y, 2);
    p.op_phi = [](double, const Vec&, const Vec&) { return Vec::Ones(2); };
    Mat a(2, 2);
    a << 1.0, -1.0, -1.0, 1.0;
    p.form_a = a;
    p.initial.zeta0 = Vec::Constant(2, 0.5);
    p = make_validated(p);
    const StepperConfig cfg = tight_config();
    Vec zeta = p.initial.zeta0;
    std::vector<double> expected{0.7, 0.9, 1.0, 1.0};
    for (int n = 0; n < 4; ++n) {
        zeta = damage_solve(p, zeta, Vec::Zero(1), 0.2 * (n + 1), 0.2, cfg);
        CHECK(zeta[0] == doctest::Approx(expected[n]).epsilon(1e-10));
        CHECK(zeta[1] == doctest::Approx(expected[n]).epsilon(1e-10));
    }
}

TEST_CASE("damage_solve: result is always inside [0,1]") {
    DqviProblem p = scalar_relaxation_problem();
    p.space_Y = identity_space(SpaceLabel::Y, 3);
    p.op_phi = [](double, const Vec&, const Vec& z) {
        return (10.0 * Vec::Ones(3) - 30.0 * z).eval();
    };
    p.form_a = Mat::Zero(3, 3);
    p.initial.zeta0 = Vec::Constant(3, 0.5);
    p = make_validated(p);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        Vec zp(3);
        for (int i = 0; i < 3; ++i) zp[i] = unif(rng);
        const Vec z = damage_solve(p, zp, Vec::Zero(1), 0.1, 0.3, tight_config());
        CHECK((z.array() >= 0.0).all());
        CHECK((z.array() <= 1.0).all());
    }
}

TEST_CASE("damage_solve: picard coupling agrees with the frozen-source solve "
          "on a source independent of damage") {
    DqviProblem p = scalar_relaxation_problem();
    p.op_phi = [](double, const Vec&, const Vec&) { return Vec::Constant(1, 0.3); };
    p = make_validated(p);
    StepperConfig semi = tight_config();
    semi.damage_source_coupling = DamageCoupling::semi_implicit;
    StepperConfig pic = tight_config();
    pic.damage_source_coupling = DamageCoupling::picard;
    const Vec zp = Vec::Constant(1, 0.4);
    const Vec a = damage_solve(p, zp, Vec::Zero(1), 0.1, 0.2, semi);
    const Vec b = damage_solve(p, zp, Vec::Zero(1), 0.1, 0.2, pic);
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("step: decoupled physics settle in a confirmation sweep") {
    // B = 0, j = 0, phi independent of u: one sweep computes everything, the
    // second only confirms.
    DqviProblem p = scalar_relaxation_problem();
    p.op_F = [](double, const Vec& w, const Vec&) { return (0.2 * w).eval(); };
    p.op_phi = [](double, const Vec&, const Vec& z) { return (0.1 - 0.2 * z.array()).matrix().eval(); };
    p.constants.L_F = 0.2;
    p.constants.L_phi = 0.2;
    p = make_validated(p);
    const TimeGrid grid(1.0, 10);
    HistoryBuffer buf(grid, 1, 1);
    buf.append(p.initial.u0, p.initial.zeta0);
    const StepperConfig cfg = tight_config();
    const State prev = initial_state(p);
    const StepResult r = step(p, buf, prev, cfg);
    CHECK(r.diag.sweeps <= 2);

    // Composing the three single-physics solves once gives the same state.
    HistoryBuffer buf2(grid, 1, 1);
    buf2.append(p.initial.u0, p.initial.zeta0);
    const VelocityResult v =
        velocity_solve(p, buf2, prev.w, prev.zeta, 1, cfg, prev.udot);
    const Vec w = wear_update(p, prev.w, v.udot, grid.t(1), grid.dt(), cfg.wear_scheme);
    const Vec z = damage_solve(p, prev.zeta, v.u, grid.t(1), grid.dt(), cfg);
    CHECK(std::abs(r.state.udot[0] - v.udot[0]) <= 2.0 * cfg.tol_outer);
    CHECK(std::abs(r.state.w[0] - w[0]) <= 2.0 * cfg.tol_outer);
    CHECK(std::abs(r.state.zeta[0] - z[0]) <= 2.0 * cfg.tol_outer);
}

TEST_CASE("step: perturbed outer initialization reaches the same state") {
    const DqviProblem p = make_builtin_problem("linear1d");
    const TimeGrid grid(1.0, 8);
    const StepperConfig cfg = tight_config();

    HistoryBuffer buf1(grid, 1, 1);
    buf1.append(p.initial.u0, p.initial.zeta0);
    State prev = initial_state(p);
    const StepResult a = step(p, buf1, prev, cfg);

    HistoryBuffer buf2(grid, 1, 1);
    buf2.append(p.initial.u0, p.initial.zeta0);
    State perturbed = prev;
    perturbed.udot = Vec::Constant(1, 5.0); // outer warm start only
    const StepResult b = step(p, buf2, perturbed, cfg);

    CHECK(std::abs(a.state.udot[0] - b.state.udot[0]) <= 2.0 * cfg.tol_outer);
    CHECK(std::abs(a.state.w[0] - b.state.w[0]) <= 2.0 * cfg.tol_outer);
    CHECK(std::abs(a.state.zeta[0] - b.state.zeta[0]) <= 2.0 * cfg.tol_outer);
}

TEST_CASE("run: N = 1 equals a single composed step") {
    const DqviProblem p = make_builtin_problem("linear1d");
    const StepperConfig cfg = tight_config();
    const TimeGrid grid(0.25, 1);
    const RunResult r = run(p, grid, cfg);
    REQUIRE(r.ok);
    REQUIRE(r.trajectory.states.size() == 2);

    HistoryBuffer buf(grid, 1, 1);
    buf.append(p.initial.u0, p.initial.zeta0);
    State prev = initial_state(p);
    const StepResult s = step(p, buf, prev, cfg);
    CHECK(r.trajectory.states[1].u[0] == s.state.u[0]);
    CHECK(r.trajectory.states[1].w[0] == s.state.w[0]);
    CHECK(r.trajectory.states[1].zeta[0] == s.state.zeta[0]);
}

TEST_CASE("run: coupled linear instance is first-order self-convergent") {
    const DqviProblem p = make_builtin_problem("linear1d");
    const StepperConfig cfg = tight_config();
    std::vector<RunResult> runs;
    for (int N : {8, 16, 32}) runs.push_back(run(p, TimeGrid(1.0, N), cfg));
    for (const RunResult& r : runs) REQUIRE(r.ok);
    // sup-node differences between consecutive refinements shrink by ~2x.
    double d01 = 0.0, d12 = 0.0;
    for (int n = 0; n <= 8; ++n) {
        d01 = std::max(d01, std::abs(runs[0].trajectory.states[n].u[0] -
                                     runs[1].trajectory.states[2 * n].u[0]));
        d12 = std::max(d12, std::abs(runs[1].trajectory.states[2 * n].u[0] -
                                     runs[2].trajectory.states[4 * n].u[0]));
    }
    CHECK(d01 / d12 >= 1.6);
    CHECK(d01 / d12 <= 2.6);
}

TEST_CASE("run: outer sweep ratios stay below 1 on the coupled instance") {
    const DqviProblem p = make_builtin_problem("linear1d");
    StepperConfig cfg = tight_config();
    cfg.tol_outer = 1e-11;
    const RunResult r = run(p, TimeGrid(1.0, 8), cfg);
    REQUIRE(r.ok);
    bool saw_ratio = false;
    for (const StepDiagnostics& d : r.trajectory.diagnostics)
        for (double ratio : d.ratios) {
            saw_ratio = true;
            CHECK(ratio < 1.0);
        }
    CHECK(saw_ratio);
}

TEST_CASE("run: refuses an infeasible margin unless overridden") {
    DqviProblem p = scalar_relaxation_problem();
    p.constants.alpha1 = 5.0; // m_C = 2 < alpha_1
    p = make_validated(p, true);
    const RunResult refused = run(p, TimeGrid(1.0, 4), tight_config());
    CHECK_FALSE(refused.ok);
    CHECK(refused.failed_step == 0);
}

TEST_CASE("run: velocity constraint stays feasible and saturates") {
    // f = 3 pushes the velocity to 1.5; the bound caps it at 1.
    DqviProblem p = scalar_relaxation_problem();
    p.op_A = [](double, const Vec& u) { return (0.0 * u).eval(); };
    p.constants.L_A = 0.0;
    p.K_V = make_box_normal_set(1.0, {0});
    p = make_validated(p);
    const RunResult r = run(p, TimeGrid(1.0, 5), tight_config());
    REQUIRE(r.ok);
    for (std::size_t n = 1; n < r.trajectory.states.size(); ++n) {
        CHECK(r.trajectory.states[n].udot[0] <= 1.0 + 1e-12);
        CHECK(r.trajectory.states[n].udot[0] == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("run: forcing perturbation moves the velocity by a stable factor") {
    const DqviProblem base = make_builtin_problem("linear1d");
    const StepperConfig cfg = tight_config();
    const TimeGrid grid(1.0, 16);
    const RunResult r0 = run(base, grid, cfg);
    REQUIRE(r0.ok);
    double c_prev = -1.0;
    for (double delta : {1e-3, 1e-2}) {
        DqviProblem p = base;
        p.forcing = [delta](double t) {
            return Vec::Constant(1, 1.0 + 0.5 * std::sin(t) + delta);
        };
        const RunResult r1 = run(p, grid, cfg);
        REQUIRE(r1.ok);
        double sup = 0.0;
        for (std::size_t n = 0; n < r0.trajectory.states.size(); ++n)
            sup = std::max(sup, std::abs(r1.trajectory.states[n].udot[0] -
                                         r0.trajectory.states[n].udot[0]));
        const double c = sup / delta;
        CHECK(std::isfinite(c));
        CHECK(c > 0.0);
        if (c_prev > 0.0) CHECK(std::abs(c - c_prev) / c_prev < 0.2);
        c_prev = c;
    }
}
