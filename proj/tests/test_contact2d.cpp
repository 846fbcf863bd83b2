#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dqvi/contact2d.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

using namespace dqvi;
using namespace dqvi::contact2d;

namespace {

/// Unit square, two triangles, left edge clamped, bottom in contact.
Mesh2D unit_square_mesh() {
    Mesh2D mesh;
    mesh.nodes.resize(4, 2);
    mesh.nodes << 0, 0, 1, 0, 1, 1, 0, 1;
    mesh.triangles = {{0, 1, 2}, {0, 2, 3}};
    mesh.boundary = {{3, 0, 1}, {0, 1, 3}, {1, 2, 2}, {2, 3, 2}};
    return mesh;
}

ContactModel demo_model(int nx = 6, int ny = 3) {
    ContactModel m;
    m.mesh = make_rect_mesh(nx, ny, 1.0, 0.5);
    m.material.lame_lambda = 1.0;
    m.material.lame_mu = 1.0;
    m.material.viscosity_scale = 1.0;
    m.material.relax_time = 1.0;
    m.material.relax_strain_coeff = 0.2;
    m.material.relax_damage_coeff = 0.1;
    m.contact.k_n = 0.5;
    m.contact.p_max = 10.0;
    m.contact.a_w = 0.5;
    m.contact.gap = 0.02;
    m.contact.friction_mu = 0.3;
    m.contact.wear_k = 0.1;
    m.contact.v_star = {1.0, 0.0};
    m.damage.kappa = 0.1;
    m.damage.lambda_D = 0.05;
    m.damage.lambda_E = 0.05;
    m.damage.lambda_w = 0.05;
    m.damage.zeta_floor = 0.01;
    m.loads.body_force = {0.0, -0.5};
    m.zeta0 = 0.9;
    return m;
}

} // namespace

TEST_CASE("mesh: parse/write round trip and validation errors") {
    std::ostringstream os;
    write_mesh(os, unit_square_mesh());
    std::istringstream in(os.str());
    const Mesh2D back = parse_mesh(in);
    CHECK(back.node_count() == 4);
    CHECK(back.triangles.size() == 2);
    CHECK(back.boundary.size() == 4);

    std::istringstream bad("nodes 2\n0 0\n1 1\n");
    CHECK_THROWS_AS(parse_mesh(bad), ParseError);
    std::istringstream junk("nodes x\n");
    CHECK_THROWS_WITH_AS(parse_mesh(junk), doctest::Contains("line 1"), ParseError);

    Mesh2D untagged = unit_square_mesh();
    untagged.boundary.pop_back();
    CHECK_THROWS_WITH_AS(validate_mesh(untagged), doctest::Contains("untagged"),
                         InvalidInputError);

    Mesh2D doubled = unit_square_mesh();
    doubled.boundary.push_back({0, 1, 2});
    CHECK_THROWS_WITH_AS(validate_mesh(doubled), doctest::Contains("twice"),
                         InvalidInputError);

    Mesh2D degenerate = unit_square_mesh();
    degenerate.nodes.row(2) << 2.0, 0.0; // collinear with the bottom edge
    CHECK_THROWS_AS(validate_mesh(degenerate), InvalidInputError);
}

TEST_CASE("assemble: unit square with clamped left edge") {
    ContactModel m;
    m.mesh = unit_square_mesh();
    const auto a = assemble_spaces(m);
    // Nodes 0 and 3 clamped, nodes 1 and 2 free.
    CHECK(a->dim_V() == 4);
    CHECK(a->dim_Y() == 4);
    // Rigid modes removed: the strain Gram is positive definite.
    Eigen::SelfAdjointEigenSolver<Mat> eig(a->space_V->gram_primary());
    CHECK(eig.eigenvalues().minCoeff() > 1e-8);
}

TEST_CASE("assemble: fully clamped mesh is rejected") {
    ContactModel m;
    m.mesh = unit_square_mesh();
    for (auto& be : m.mesh.boundary) be.tag = 1;
    CHECK_THROWS_AS(assemble_spaces(m), InvalidInputError);
}

TEST_CASE("assemble: contact-boundary mass is the half edge length per node") {
    ContactModel m;
    m.mesh = make_rect_mesh(1, 1, 1.0, 1.0); // single bottom edge of length 1
    const auto a = assemble_spaces(m);
    REQUIRE(a->contact_count() == 2);
    for (int i = 0; i < 2; ++i) {
        CHECK(a->boundary_mass[i] == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(a->space_W->gram_primary().row(i).sum() == doctest::Approx(0.5));
        // Bottom edge outward normal points down.
        CHECK(a->normals[i][0] == doctest::Approx(0.0));
        CHECK(a->normals[i][1] == doctest::Approx(-1.0));
    }
}

TEST_CASE("element: strain matrix annihilates rigid translations") {
    ContactModel m;
    m.mesh = unit_square_mesh();
    const auto a = assemble_spaces(m);
    for (const ElementData& e : a->elements) {
        Eigen::Matrix<double, 6, 1> tx, ty;
        tx << 1, 0, 1, 0, 1, 0;
        ty << 0, 1, 0, 1, 0, 1;
        CHECK((e.strain_matrix * tx).norm() <= 1e-14);
        CHECK((e.strain_matrix * ty).norm() <= 1e-14);
    }
}

TEST_CASE("element: hand-assembled stiffness of the unit triangle") {
    // Triangle (0,0), (1,0), (0,1); barycentric gradients give
    // b = (-1, 1, 0), c = (-1, 0, 1); area 1/2; plane strain with
    // lambda = mu = 1.
    Eigen::Matrix<double, 3, 6> B;
    B << -1, 0, 1, 0, 0, 0,
          0, -1, 0, 0, 0, 1,
         -1, -1, 0, 1, 1, 0;
    Eigen::Matrix3d D;
    D << 3, 1, 0,
         1, 3, 0,
         0, 0, 1;
    const Eigen::Matrix<double, 6, 6> k_hand = 0.5 * B.transpose() * D * B;

    ContactModel m;
    m.mesh.nodes.resize(3, 2);
    m.mesh.nodes << 0, 0, 1, 0, 0, 1;
    m.mesh.triangles = {{0, 1, 2}};
    m.mesh.boundary = {{1, 2, 2}, {2, 0, 1}, {0, 1, 3}};
    const auto a = assemble_spaces(m);
    REQUIRE(a->elements.size() == 1);
    CHECK((a->elements[0].strain_matrix - B).cwiseAbs().maxCoeff() <= 1e-14);

    // Element force under the unit horizontal stretch mode u_x = x.
    Eigen::Matrix<double, 6, 1> stretch;
    stretch << 0, 0, 1, 0, 0, 0;
    const Eigen::Matrix<double, 6, 1> force_hand = k_hand * stretch;
    const CompiledContact cc = compile(m, 1.0, /*allow_margin_violation=*/true);
    // The clamped edge (2,0) removes nodes 0 and 2; only node 1 carries dofs.
    REQUIRE(a->node_to_free[1] >= 0);
    Vec u = Vec::Zero(a->dim_V());
    u[2 * a->node_to_free[1]] = 1.0;
    const Vec f = cc.problem.op_A(0.0, u);
    CHECK(f[2 * a->node_to_free[1]] == doctest::Approx(force_hand[2]).epsilon(1e-13));
    CHECK(f[2 * a->node_to_free[1] + 1] == doctest::Approx(force_hand[3]).epsilon(1e-13));

    // Element stiffness symmetry and exactly three rigid-body zero modes.
    CHECK((k_hand - k_hand.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> eig(k_hand);
    int zero_modes = 0;
    for (int i = 0; i < 6; ++i)
        if (std::abs(eig.eigenvalues()[i]) < 1e-10 * k_hand.trace()) ++zero_modes;
    CHECK(zero_modes == 3);
}

TEST_CASE("normal compliance: boundary cases and direct formula") {
    ContactParams c;
    c.k_n = 2.0;
    c.a_w = 1.0;
    c.p_max = 10.0;
    CHECK(normal_compliance(0.0, 0.0, c) == 0.0);
    CHECK(normal_compliance(0.0, -3.0, c) == 0.0);
    CHECK(normal_compliance(1.0, 3.0, c) == doctest::Approx(8.0));
    // Saturation at p_max.
    CHECK(normal_compliance(10.0, 10.0, c) == doctest::Approx(2.0 * 10.0));
    // Lipschitz constant k_n * max(1, a_w) over sampled pairs.
    for (double w1 : {-1.0, 0.5, 2.0})
        for (double r1 : {-2.0, 0.3, 4.0})
            for (double w2 : {-0.5, 1.5})
                for (double r2 : {-1.0, 2.5}) {
                    const double lhs =
                        std::abs(normal_compliance(w1, r1, c) - normal_compliance(w2, r2, c));
                    CHECK(lhs <= 2.0 * (std::abs(w1 - w2) + std::abs(r1 - r2)) + 1e-14);
                }
}

TEST_CASE("contact functional: zero state gives zero gradient") {
    const CompiledContact cc = compile(demo_model(), 1.0);
    const auto& a = *cc.assembly;
    const Vec w = Vec::Zero(a.dim_W());
    const Vec z = Vec::Zero(2 * a.contact_count());
    CHECK(cc.problem.j.gradient_in_v(w, z).norm() == 0.0);
}

TEST_CASE("contact functional: frictionless gradient is purely normal") {
    ContactModel m = demo_model();
    m.contact.friction_mu = 0.0;
    const CompiledContact cc = compile(m, 1.0);
    const auto& a = *cc.assembly;
    const Vec w = Vec::Constant(a.dim_W(), 0.2);
    Vec z(2 * a.contact_count());
    for (int i = 0; i < a.contact_count(); ++i) {
        z[2 * i] = 0.3;
        z[2 * i + 1] = -0.4; // pushes into the foundation, normal (0,-1)
    }
    const Vec g = cc.problem.j.gradient_in_v(w, z);
    for (int i = 0; i < a.contact_count(); ++i) {
        const int f = a.node_to_free[a.gamma3_nodes[i]];
        CHECK(std::abs(g[2 * f]) <= 1e-14); // tangential on the flat bottom
        CHECK(g[2 * f + 1] != 0.0);         // normal load present
    }
}

TEST_CASE("contact functional: single-edge hand integral") {
    // 1x1 mesh: bottom edge of length 1, two contact nodes with mass 1/2.
    ContactModel m;
    m.mesh = make_rect_mesh(1, 1, 1.0, 1.0);
    m.contact.k_n = 1.0;
    m.contact.p_max = 10.0;
    m.contact.a_w = 0.0;
    m.contact.friction_mu = 0.25;
    m.contact.v_star = {1.0, 0.0}; // n* = (-1, 0)
    const CompiledContact cc = compile(m, 1.0, /*allow_margin_violation=*/true);
    const auto& a = *cc.assembly;
    REQUIRE(a.contact_count() == 2);
    const Vec w = Vec::Zero(2);
    Vec z(4);
    z << 0.0, -0.5, 0.0, -0.5; // z_nu = 0.5, p = 0.5
    const Vec g = cc.problem.j.gradient_in_v(w, z);
    for (int i = 0; i < 2; ++i) {
        const int f = a.node_to_free[a.gamma3_nodes[i]];
        // Tangential: mu p (n*.tau) tau with tau = (1,0): -0.25 * 0.5 * 0.5.
        CHECK(g[2 * f] == doctest::Approx(-0.25 * 0.5 * 0.5).epsilon(1e-13));
        // Normal: p nu with nu = (0,-1), mass 1/2.
        CHECK(g[2 * f + 1] == doctest::Approx(-0.5 * 0.5).epsilon(1e-13));
    }

    // evaluate() is the pairing with the gradient (linear_in_v invariant).
    Vec v = Vec::Zero(a.dim_V());
    for (int i = 0; i < a.dim_V(); ++i) v[i] = 0.1 * (i + 1);
    const double direct = cc.problem.j.evaluate(w, z, a.trace_matrix * v);
    CHECK(direct == doctest::Approx(g.dot(v)).epsilon(1e-12));
}

TEST_CASE("wear rate and damage source") {
    const CompiledContact cc = compile(demo_model(), 1.0);
    const auto& a = *cc.assembly;
    const DqviProblem& p = cc.problem;

    // udot = 0, w = 0: no pressure, no wear.
    CHECK(p.op_F(0.0, Vec::Zero(a.dim_W()), Vec::Zero(a.dim_V())).norm() == 0.0);

    // Wear rate is nonnegative for arbitrary states.
    Vec udot = Vec::Zero(a.dim_V());
    for (int i = 0; i < a.dim_V(); ++i) udot[i] = std::sin(i * 0.7) * 0.3;
    const Vec rate = p.op_F(0.0, Vec::Constant(a.dim_W(), 0.1), udot);
    CHECK((rate.array() >= 0.0).all());

    // zeta = 1 with zero strain: source is lambda_w everywhere.
    const Vec phi1 = p.op_phi(0.0, Vec::Zero(a.dim_V()), Vec::Ones(a.dim_Y()));
    for (int i = 0; i < a.dim_Y(); ++i)
        CHECK(phi1[i] == doctest::Approx(0.05).epsilon(1e-14));

    // zeta below the floor uses the floored value.
    const double zf = cc.model.damage.zeta_floor;
    const Vec phi2 = p.op_phi(0.0, Vec::Zero(a.dim_V()), Vec::Constant(a.dim_Y(), zf / 2));
    const double expected = 0.05 * (1.0 - zf) / zf + 0.05;
    for (int i = 0; i < a.dim_Y(); ++i)
        CHECK(phi2[i] == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("compile: frictionless rigid-free limit has zero alpha constants") {
    ContactModel m = demo_model();
    m.contact.friction_mu = 0.0;
    m.contact.k_n = 0.0;
    const CompiledContact cc = compile(m, 1.0);
    CHECK(cc.problem.constants.alpha0 == 0.0);
    CHECK(cc.problem.constants.alpha1 == 0.0);
    CHECK(cc.theorem_margin == doctest::Approx(2.0)); // m_C = 2 mu theta
    CHECK_FALSE(cc.margin_warning);
}

TEST_CASE("compile: margin arithmetic of the smallness condition") {
    // m_C = 1, |mu| = 0.3, L_p = 0.5: bound 0.65 < 1, margin 0.35, no warning.
    ContactModel m = demo_model();
    m.material.lame_mu = 0.5; // m_C = 2 mu theta = 1
    m.material.lame_lambda = 0.5;
    m.contact.k_n = 0.5;
    m.contact.a_w = 0.5;
    m.contact.friction_mu = 0.3;
    const CompiledContact cc = compile(m, 1.0, /*allow_margin_violation=*/true);
    CHECK(cc.theorem_margin == doctest::Approx(1.0 - 0.65).epsilon(1e-12));
    CHECK_FALSE(cc.margin_warning);

    // m_C = 0.5, mu = 1, L_p = 0.5: margin -0.5, warning emitted.
    ContactModel bad = demo_model();
    bad.material.lame_mu = 0.25;
    bad.contact.k_n = 0.5;
    bad.contact.a_w = 0.0;
    bad.contact.friction_mu = 1.0;
    const CompiledContact cc2 = compile(bad, 1.0, /*allow_margin_violation=*/true);
    CHECK(cc2.theorem_margin == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(cc2.margin_warning);
}

TEST_CASE("compile: closed-form constants and a positive discrete margin") {
    const CompiledContact cc = compile(demo_model(), 1.0);
    CHECK(cc.problem.constants.L_A == doctest::Approx(4.0)); // 2(mu + lambda)
    CHECK(cc.problem.constants.m_C == doctest::Approx(2.0)); // 2 mu theta
    CHECK(cc.problem.constants.alpha1 ==
          doctest::Approx(1.3 * 0.5 * cc.assembly->trace_norm * cc.assembly->trace_norm));
    CHECK(cc.problem.constants.m_C > cc.problem.constants.alpha1);
    CHECK(cc.assembly->trace_norm > 0.0);
}

TEST_CASE("stepper: linear frictionless unconstrained case matches a dense solve") {
    ContactModel m = demo_model(3, 2);
    m.contact.friction_mu = 0.0;
    m.contact.k_n = 0.0;  // no contact pressure
    m.contact.gap = 10.0; // constraint inactive
    m.material.relax_damage_coeff = 0.0; // decouple damage from the velocity solve
    const double horizon = 0.5;
    const int steps = 4;
    const CompiledContact cc = compile(m, horizon);
    StepperConfig cfg;
    cfg.tol_outer = 1e-11;
    cfg.tol_velocity = 1e-12;
    cfg.tol_damage = 1e-12;
    cfg.tol_inner = 1e-13;
    const TimeGrid grid(horizon, steps);
    const RunResult r = run(cc.problem, grid, cfg);
    REQUIRE(r.ok);

    // Independent dense reference: the per-step linear system in udot_n,
    //   (theta K + dt K + dt^2/2 c_B G) udot = f - K u_prev - past history
    //                                          - dt/2 c_B G u_prev,
    // with the trapezoid endpoint acting on u_n = u_prev + dt udot.
    const auto& a = *cc.assembly;
    const Mat& K = a.stiffness;
    const Mat& G = a.gram_eps;
    const double dt = grid.dt();
    const double c_b = m.material.relax_strain_coeff;
    std::vector<Vec> us{cc.problem.initial.u0};
    for (int n = 1; n <= steps; ++n) {
        const double t_n = grid.t(n);
        Vec past = Vec::Zero(a.dim_V());
        for (int i = 0; i < n; ++i) {
            const double weight = (i == 0) ? 0.5 : 1.0;
            past += weight * dt * std::exp(-(t_n - grid.t(i))) * c_b * (G * us[i]);
        }
        const Mat m_sys = K + dt * K + 0.5 * dt * dt * c_b * G;
        const Vec rhs = cc.problem.forcing(t_n) - K * us[n - 1] - past -
                        0.5 * dt * c_b * (G * us[n - 1]);
        const Vec udot = m_sys.llt().solve(rhs);
        us.push_back(us[n - 1] + dt * udot);
        CHECK((r.trajectory.states[n].udot - udot).cwiseAbs().maxCoeff() <= 1e-8);
        CHECK((r.trajectory.states[n].u - us[n]).cwiseAbs().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("edge-averaged normals at a corner of the contact boundary") {
    // Contact boundary wrapping a corner: bottom and right edges tagged 3.
    ContactModel m;
    m.mesh = make_rect_mesh(2, 2, 1.0, 1.0);
    for (auto& be : m.mesh.boundary) {
        const bool right = m.mesh.nodes(be.a, 0) == 1.0 && m.mesh.nodes(be.b, 0) == 1.0;
        if (right) be.tag = 3;
    }
    const auto a = assemble_spaces(m);
    bool corner_checked = false;
    for (int i = 0; i < a->contact_count(); ++i) {
        const int node = a->gamma3_nodes[i];
        if (m.mesh.nodes(node, 0) == 1.0 && m.mesh.nodes(node, 1) == 0.0) {
            // Average of (0,-1) and (1,0), normalized.
            CHECK(a->normals[i][0] == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
            CHECK(a->normals[i][1] == doctest::Approx(-std::sqrt(0.5)).epsilon(1e-12));
            corner_checked = true;
        }
    }
    CHECK(corner_checked);
}
