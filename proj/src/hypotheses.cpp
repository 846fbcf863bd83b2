#include "dqvi/hypotheses.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace dqvi {

namespace {

constexpr double kRelSlack = 1e-9;
constexpr double kAbsSlack = 1e-12;

class Sampler {
public:
    Sampler(unsigned long long seed) : rng_(seed), unif_(-1.0, 1.0) {}

    double time_in(double T) { return 0.5 * (unif_(rng_) + 1.0) * T; }

    /// Random array with primary norm uniform in [0.2, 1]. Declared constants
    /// are audited on this unit-scale ball.
    Vec draw(const DiscreteSpace& space) {
        Vec x(space.dim());
        for (int i = 0; i < x.size(); ++i) x[i] = unif_(rng_);
        const double n = space.norm_primary(x);
        if (n < 1e-14) return x;
        const double target = 0.2 + 0.4 * (unif_(rng_) + 1.0);
        return x * (target / n);
    }

private:
    std::mt19937_64 rng_;
    std::uniform_real_distribution<double> unif_;
};

HypothesisCheck upper_bound_check(std::string name, double declared, double observed,
                                  std::string detail = {}) {
    HypothesisCheck c;
    c.name = std::move(name);
    c.declared = declared;
    c.observed = observed;
    c.worst_ratio = observed / std::max(declared, 1e-300);
    c.pass = observed <= declared * (1.0 + kRelSlack) + kAbsSlack;
    c.detail = std::move(detail);
    return c;
}

HypothesisCheck lower_bound_check(std::string name, double declared, double observed,
                                  std::string detail = {}) {
    HypothesisCheck c;
    c.name = std::move(name);
    c.declared = declared;
    c.observed = observed;
    c.worst_ratio = declared / std::max(observed, 1e-300);
    c.pass = observed >= declared * (1.0 - kRelSlack) - kAbsSlack;
    c.detail = std::move(detail);
    return c;
}

} // namespace

const HypothesisCheck* HypothesisReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

std::string HypothesisReport::summary() const {
    std::ostringstream os;
    for (const auto& c : checks) {
        os << (c.pass ? "pass " : "FAIL ") << c.name << ": declared=" << c.declared
           << " observed=" << c.observed << " ratio=" << c.worst_ratio;
        if (!c.detail.empty()) os << " (" << c.detail << ")";
        os << "\n";
    }
    os << "margin m_C - alpha_1 = " << margin_m_alpha << "\n";
    if (contraction_valid)
        os << "contraction constants: c_p=" << contraction.c_p << " c_q=" << contraction.c_q
           << " c_r=" << contraction.c_r << "\n";
    return os.str();
}

HypothesisReport validate_hypotheses(const DqviProblem& p, int samples,
                                     unsigned long long rng_seed) {
    require(samples >= 1, "validate_hypotheses: samples must be >= 1");
    Sampler draw(rng_seed);
    const DiscreteSpace& V = *p.space_V;
    const DiscreteSpace& Y = *p.space_Y;
    const DiscreteSpace& W = *p.space_W;
    const ProblemConstants& c = p.constants;

    double obs_LA = 0.0, obs_LB = 0.0, obs_rho = 0.0, obs_LC1 = 0.0, obs_LC2 = 0.0;
    double obs_mC = std::numeric_limits<double>::infinity();
    double obs_a0 = 0.0, obs_a1 = 0.0, obs_j = 0.0;
    double obs_LF = 0.0, obs_Lphi = 0.0;
    double obs_coercive = std::numeric_limits<double>::infinity();

    for (int s = 0; s < samples; ++s) {
        const double t = draw.time_in(c.T);
        const double t2 = draw.time_in(c.T);
        const Vec u1 = draw.draw(V), u2 = draw.draw(V);
        const Vec v1 = draw.draw(V), v2 = draw.draw(V);
        const Vec z1 = draw.draw(Y), z2 = draw.draw(Y);
        const Vec w1 = draw.draw(W), w2 = draw.draw(W);

        const double du_V = V.norm_primary(u1 - u2);
        const double dv_V = V.norm_primary(v1 - v2);
        const double dz_Y = Y.norm_primary(z1 - z2);
        const double dz_Y1 = Y.norm_pivot(z1 - z2);
        const double dw_W = W.norm_primary(w1 - w2);

        if (du_V > 1e-12) {
            obs_LA = std::max(obs_LA, V.dual_norm(p.op_A(t, u1) - p.op_A(t, u2)) / du_V);
            const Vec dc = p.op_C(t, u1) - p.op_C(t, u2);
            obs_LC1 = std::max(obs_LC1, V.dual_norm(dc) / du_V);
            obs_mC = std::min(obs_mC, dc.dot(u1 - u2) / (du_V * du_V));
        }
        if (du_V + dz_Y > 1e-12)
            obs_LB = std::max(obs_LB, V.dual_norm(p.op_B(t, u1, z1) - p.op_B(t, u2, z2)) /
                                          (du_V + dz_Y));
        obs_rho = std::max(obs_rho, V.dual_norm(p.op_B(t, u1, z1)) /
                                        std::max(Y.norm_primary(z1) + V.norm_primary(u1),
                                                 1e-12));
        if (std::abs(t - t2) > 1e-12)
            obs_LC2 = std::max(obs_LC2,
                               V.dual_norm(p.op_C(t, u1) - p.op_C(t2, u1)) / std::abs(t - t2));

        // H(j)(b), isolating the two slots and the combined inequality.
        if (p.j.evaluate && p.j.trace) {
            const Vec tu1 = p.j.trace(u1), tu2 = p.j.trace(u2);
            const Vec tv1 = p.j.trace(v1), tv2 = p.j.trace(v2);
            auto four_term = [&](const Vec& wa, const Vec& za, const Vec& wb, const Vec& zb) {
                return p.j.evaluate(wa, za, tv2) - p.j.evaluate(wa, za, tv1) +
                       p.j.evaluate(wb, zb, tv1) - p.j.evaluate(wb, zb, tv2);
            };
            if (dw_W > 1e-12 && dv_V > 1e-12)
                obs_a0 = std::max(obs_a0, four_term(w1, tu1, w2, tu1) / (dw_W * dv_V));
            if (du_V > 1e-12 && dv_V > 1e-12)
                obs_a1 = std::max(obs_a1, four_term(w1, tu1, w1, tu2) / (du_V * dv_V));
            const double mixed_rhs = c.alpha0 * dw_W * dv_V + c.alpha1 * du_V * dv_V;
            if (mixed_rhs > 1e-12)
                obs_j = std::max(obs_j, four_term(w1, tu1, w2, tu2) / mixed_rhs);
        }

        if (dw_W + du_V > 1e-12)
            obs_LF = std::max(obs_LF, W.norm_primary(p.op_F(t, w1, u1) - p.op_F(t, w2, u2)) /
                                          (dw_W + du_V));
        if (du_V + dz_Y1 > 1e-12)
            obs_Lphi = std::max(obs_Lphi,
                                Y.norm_pivot(p.op_phi(t, u1, z1) - p.op_phi(t, u2, z2)) /
                                    (du_V + dz_Y1));

        const double ny1 = Y.norm_pivot(z1), ny = Y.norm_primary(z1);
        if (ny > 1e-12)
            obs_coercive = std::min(obs_coercive,
                                    (z1.dot(p.form_a * z1) + c.a1 * ny1 * ny1) / (ny * ny));
    }

    HypothesisReport report;
    report.checks.push_back(upper_bound_check("H(A) Lipschitz L_A", c.L_A, obs_LA));
    report.checks.push_back(upper_bound_check("H(B) Lipschitz L_B", c.L_B, obs_LB));
    report.checks.push_back(upper_bound_check("H(B) growth bound rho", c.rho_bound, obs_rho));
    report.checks.push_back(upper_bound_check("H(C) Lipschitz L_C1", c.L_C1, obs_LC1));
    report.checks.push_back(upper_bound_check("H(C) time-Lipschitz L_C2", c.L_C2, obs_LC2));
    report.checks.push_back(lower_bound_check("H(C) strong monotonicity m_C", c.m_C,
                                              std::isfinite(obs_mC) ? obs_mC : c.m_C));
    report.checks.push_back(upper_bound_check("H(j) wear slope alpha_0", c.alpha0, obs_a0));
    report.checks.push_back(upper_bound_check("H(j) solution slope alpha_1", c.alpha1, obs_a1));
    report.checks.push_back(
        upper_bound_check("H(j) combined bound", 1.0, obs_j, "lhs over declared rhs"));
    report.checks.push_back(upper_bound_check("H(F) Lipschitz L_F", c.L_F, obs_LF));
    report.checks.push_back(upper_bound_check("H(phi) Lipschitz L_phi", c.L_phi, obs_Lphi));

    const double fa_scale = std::max(1.0, p.form_a.cwiseAbs().maxCoeff());
    const double fa_asym = (p.form_a - p.form_a.transpose()).cwiseAbs().maxCoeff();
    report.checks.push_back(
        upper_bound_check("H(a) symmetry", 1e-12 * fa_scale, fa_asym, "max |a - a'|"));
    report.checks.push_back(lower_bound_check(
        "H(a) coercivity a2", c.a2, std::isfinite(obs_coercive) ? obs_coercive : c.a2));

    report.margin_m_alpha = c.m_C - c.alpha1;
    {
        HypothesisCheck smallness;
        smallness.name = "smallness m_C > alpha_1";
        smallness.declared = c.alpha1;
        smallness.observed = c.m_C;
        smallness.worst_ratio = c.alpha1 / std::max(c.m_C, 1e-300);
        smallness.pass = c.m_C > c.alpha1;
        report.checks.push_back(smallness);
    }
    if (c.m_C > c.alpha1) {
        report.contraction = contraction_constants(c);
        report.contraction_valid = true;
    }
    for (const auto& chk : report.checks) report.all_pass = report.all_pass && chk.pass;
    return report;
}

} // namespace dqvi
