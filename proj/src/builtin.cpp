#include "dqvi/builtin.hpp"

#include <cmath>
#include <memory>

namespace dqvi {

namespace {

std::shared_ptr<const DiscreteSpace> scalar_space(SpaceLabel label) {
    return std::make_shared<DiscreteSpace>(label, Mat::Identity(1, 1), Mat::Identity(1, 1));
}

DqviProblem make_zero_problem() {
    DqviProblem p;
    p.space_V = scalar_space(SpaceLabel::V);
    p.space_Y = scalar_space(SpaceLabel::Y);
    p.space_W = scalar_space(SpaceLabel::W);
    p.K_V = make_whole_space_set();
    p.K_Y = make_unit_interval_set();
    p.op_A = [](double, const Vec& u) { return (0.0 * u).eval(); };
    p.op_B = [](double, const Vec& u, const Vec&) { return (0.0 * u).eval(); };
    p.op_C = [](double, const Vec& v) { return v; };
    p.op_F = [](double, const Vec& w, const Vec&) { return (0.0 * w).eval(); };
    p.op_phi = [](double, const Vec&, const Vec& z) { return (0.0 * z).eval(); };
    p.form_a = Mat::Zero(1, 1);
    p.j = make_zero_jspec(1);
    p.forcing = [](double) { return Vec::Zero(1); };
    p.initial.u0 = Vec::Zero(1);
    p.initial.w0 = Vec::Zero(1);
    p.initial.zeta0 = Vec::Constant(1, 0.5);
    p.constants.m_C = 1.0;
    p.constants.L_C1 = 1.0;
    p.constants.a1 = 1.0;
    p.constants.a2 = 1.0;
    p.constants.T = 1.0;
    return make_validated(std::move(p));
}

DqviProblem make_linear1d_problem() {
    DqviProblem p;
    p.space_V = scalar_space(SpaceLabel::V);
    p.space_Y = scalar_space(SpaceLabel::Y);
    p.space_W = scalar_space(SpaceLabel::W);
    p.K_V = make_whole_space_set();
    p.K_Y = make_unit_interval_set();
    p.op_A = [](double, const Vec& u) { return u; };
    p.op_B = [](double lag, const Vec& u, const Vec& zeta) {
        return (std::exp(-lag) * (0.5 * u + 0.25 * zeta)).eval();
    };
    p.op_C = [](double t, const Vec& v) {
        return (2.0 * v + Vec::Constant(1, 0.2 * t)).eval();
    };
    p.op_F = [](double, const Vec& w, const Vec& v) { return (-0.5 * w + 0.3 * v).eval(); };
    p.op_phi = [](double t, const Vec& u, const Vec& zeta) {
        return (0.2 * u - 0.3 * zeta + Vec::Constant(1, 0.1 * std::sin(t))).eval();
    };
    p.form_a = 0.3 * Mat::Identity(1, 1);
    p.j = make_zero_jspec(1);
    p.forcing = [](double t) { return Vec::Constant(1, 1.0 + 0.5 * std::sin(t)); };
    p.initial.u0 = Vec::Zero(1);
    p.initial.w0 = Vec::Zero(1);
    p.initial.zeta0 = Vec::Constant(1, 0.5);

    ProblemConstants& c = p.constants;
    c.L_A = 1.0;
    c.L_B = 0.5;
    c.rho_bound = 0.5;
    c.m_C = 2.0;
    c.L_C1 = 2.0;
    c.L_C2 = 0.2;
    c.alpha0 = 0.0;
    c.alpha1 = 0.0;
    c.L_F = 0.5;
    c.L_phi = 0.3;
    c.a1 = 1.0;
    c.a2 = 1.0;
    c.T = 1.0;
    return make_validated(std::move(p));
}

} // namespace

DqviProblem make_builtin_problem(const std::string& name) {
    if (name == "zero") return make_zero_problem();
    if (name == "linear1d") return make_linear1d_problem();
    throw InvalidInputError("unknown builtin problem '" + name + "'");
}

std::vector<std::string> builtin_problem_names() { return {"zero", "linear1d"}; }

} // namespace dqvi
