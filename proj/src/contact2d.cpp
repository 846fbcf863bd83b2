#include "dqvi/contact2d.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace dqvi {
namespace contact2d {

double normal_compliance(double w, double r, const ContactParams& c) {
    const double arg = std::max(r, 0.0) + c.a_w * std::max(w, 0.0);
    return c.k_n * std::clamp(arg, 0.0, c.p_max);
}

Vec Assembly::normal_components(const Vec& trace_values) const {
    const int nc = contact_count();
    require(trace_values.size() == 2 * nc, "normal_components: trace dimension mismatch");
    Vec out(nc);
    for (int i = 0; i < nc; ++i)
        out[i] = trace_values[2 * i] * normals[i][0] + trace_values[2 * i + 1] * normals[i][1];
    return out;
}

Vec Assembly::recovered_strain_square(const Vec& u) const {
    require(u.size() == dim_V(), "recovered_strain_square: dimension mismatch");
    Vec num = Vec::Zero(node_patch_area.size());
    for (const ElementData& e : elements) {
        Eigen::Matrix<double, 6, 1> ue = Eigen::Matrix<double, 6, 1>::Zero();
        for (int k = 0; k < 3; ++k) {
            const int f = node_to_free[e.nodes[k]];
            if (f >= 0) {
                ue[2 * k] = u[2 * f];
                ue[2 * k + 1] = u[2 * f + 1];
            }
        }
        const Eigen::Vector3d voigt = e.strain_matrix * ue;
        const double sq = voigt[0] * voigt[0] + voigt[1] * voigt[1] +
                          0.5 * voigt[2] * voigt[2];
        for (int k = 0; k < 3; ++k) num[e.nodes[k]] += e.area * sq;
    }
    return num.array() / node_patch_area.array();
}

namespace {

Eigen::Matrix<double, 3, 6> strain_displacement(const Mesh2D& mesh,
                                                const std::array<int, 3>& tri, double area) {
    // Barycentric gradients: grad(phi_k) = (b_k, c_k).
    const auto p0 = mesh.nodes.row(tri[0]), p1 = mesh.nodes.row(tri[1]),
               p2 = mesh.nodes.row(tri[2]);
    const double inv = 1.0 / (2.0 * area);
    const double b[3] = {(p1[1] - p2[1]) * inv, (p2[1] - p0[1]) * inv, (p0[1] - p1[1]) * inv};
    const double c[3] = {(p2[0] - p1[0]) * inv, (p0[0] - p2[0]) * inv, (p1[0] - p0[0]) * inv};
    Eigen::Matrix<double, 3, 6> B = Eigen::Matrix<double, 3, 6>::Zero();
    for (int k = 0; k < 3; ++k) {
        B(0, 2 * k) = b[k];
        B(1, 2 * k + 1) = c[k];
        B(2, 2 * k) = c[k];
        B(2, 2 * k + 1) = b[k];
    }
    return B;
}

} // namespace

std::shared_ptr<const Assembly> assemble_spaces(const ContactModel& model) {
    validate_mesh(model.mesh);
    const Mesh2D& mesh = model.mesh;
    const int n_nodes = mesh.node_count();

    bool has_clamped = false;
    std::vector<bool> clamped(n_nodes, false);
    for (const BoundaryEdge& be : mesh.boundary)
        if (be.tag == 1) {
            clamped[be.a] = clamped[be.b] = true;
            has_clamped = true;
        }
    require(has_clamped, "contact model: clamped boundary (tag 1) must be nonempty");

    auto asm_out = std::make_shared<Assembly>();
    Assembly& a = *asm_out;
    a.node_to_free.assign(n_nodes, -1);
    for (int i = 0; i < n_nodes; ++i)
        if (!clamped[i]) {
            a.node_to_free[i] = static_cast<int>(a.free_nodes.size());
            a.free_nodes.push_back(i);
        }
    const int n_free = static_cast<int>(a.free_nodes.size());
    if (n_free == 0) throw InvalidInputError("contact model: every node clamped, V empty");
    const int dim_v = 2 * n_free;
    const int dim_y = n_nodes;

    // Element matrices. Plane strain in Voigt form with engineering shear.
    const double lam = model.material.lame_lambda;
    const double mu = model.material.lame_mu;
    require(mu > 0.0 && lam >= 0.0, "contact model: need mu > 0, lambda >= 0");
    Eigen::Matrix3d hooke;
    hooke << lam + 2 * mu, lam, 0, lam, lam + 2 * mu, 0, 0, 0, mu;
    const Eigen::Matrix3d tensor_gram = Eigen::Vector3d(1.0, 1.0, 0.5).asDiagonal();

    Mat stiffness = Mat::Zero(dim_v, dim_v);
    Mat gram_eps = Mat::Zero(dim_v, dim_v);
    Mat mass_vector = Mat::Zero(dim_v, dim_v);
    Mat coupling = Mat::Zero(dim_v, dim_y);
    Mat stiff_scalar = Mat::Zero(dim_y, dim_y);
    Vec lumped_scalar = Vec::Zero(dim_y);
    a.node_patch_area = Vec::Zero(n_nodes);
    a.domain_area = 0.0;
    a.min_element_area = std::numeric_limits<double>::infinity();

    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        const double area = triangle_area(mesh, static_cast<int>(t));
        a.domain_area += area;
        a.min_element_area = std::min(a.min_element_area, area);
        const auto B = strain_displacement(mesh, tri, area);
        const Eigen::Matrix<double, 6, 6> ke = area * B.transpose() * hooke * B;
        const Eigen::Matrix<double, 6, 6> ge = area * B.transpose() * tensor_gram * B;
        a.elements.push_back({tri, area, B});

        int dofs[6];
        for (int k = 0; k < 3; ++k) {
            const int f = a.node_to_free[tri[k]];
            dofs[2 * k] = f >= 0 ? 2 * f : -1;
            dofs[2 * k + 1] = f >= 0 ? 2 * f + 1 : -1;
            a.node_patch_area[tri[k]] += area;
            lumped_scalar[tri[k]] += area / 3.0;
        }
        for (int r = 0; r < 6; ++r) {
            if (dofs[r] < 0) continue;
            for (int s = 0; s < 6; ++s) {
                if (dofs[s] < 0) continue;
                stiffness(dofs[r], dofs[s]) += ke(r, s);
                gram_eps(dofs[r], dofs[s]) += ge(r, s);
            }
        }
        // Consistent vector mass and the dilatation coupling int zeta div(v).
        for (int r = 0; r < 3; ++r) {
            for (int s = 0; s < 3; ++s) {
                const double m = area / 12.0 * (r == s ? 2.0 : 1.0);
                for (int comp = 0; comp < 2; ++comp) {
                    const int dr = dofs[2 * r + comp], ds = dofs[2 * s + comp];
                    if (dr >= 0 && ds >= 0) mass_vector(dr, ds) += m;
                }
                stiff_scalar(tri[r], tri[s]) +=
                    area * (B(0, 2 * r) * B(0, 2 * s) + B(1, 2 * r + 1) * B(1, 2 * s + 1));
            }
            for (int s = 0; s < 3; ++s) {
                if (dofs[2 * r] >= 0) coupling(dofs[2 * r], tri[s]) += area / 3.0 * B(0, 2 * r);
                if (dofs[2 * r + 1] >= 0)
                    coupling(dofs[2 * r + 1], tri[s]) += area / 3.0 * B(1, 2 * r + 1);
            }
        }
    }

    // Contact boundary geometry: edge-averaged outward normals and lumped
    // boundary mass at the free tag-3 nodes.
    std::vector<Eigen::Vector2d> normal_acc(n_nodes, Eigen::Vector2d::Zero());
    std::vector<double> bmass(n_nodes, 0.0);
    std::set<int> gamma3_set;
    for (const BoundaryEdge& be : mesh.boundary) {
        if (be.tag != 3) continue;
        const Eigen::Vector2d pa = mesh.nodes.row(be.a), pb = mesh.nodes.row(be.b);
        const Eigen::Vector2d edge = pb - pa;
        const double len = edge.norm();
        Eigen::Vector2d nrm(edge[1], -edge[0]);
        nrm /= len;
        // Orient away from the interior: find the triangle owning this edge.
        for (const auto& tri : mesh.triangles) {
            int other = -1;
            int hits = 0;
            for (int k : tri) {
                if (k == be.a || k == be.b)
                    ++hits;
                else
                    other = k;
            }
            if (hits == 2 && other >= 0) {
                const Eigen::Vector2d mid = 0.5 * (pa + pb);
                const Eigen::Vector2d to_interior = Eigen::Vector2d(mesh.nodes.row(other)) - mid;
                if (nrm.dot(to_interior) > 0.0) nrm = -nrm;
                break;
            }
        }
        for (int node : {be.a, be.b}) {
            normal_acc[node] += nrm * len;
            bmass[node] += 0.5 * len;
            if (a.node_to_free[node] >= 0) gamma3_set.insert(node);
        }
    }
    a.gamma3_nodes.assign(gamma3_set.begin(), gamma3_set.end());
    const int n_c = static_cast<int>(a.gamma3_nodes.size());
    a.normals.resize(n_c);
    a.tangents.resize(n_c);
    a.boundary_mass = Vec::Zero(std::max(n_c, 1));
    a.trace_matrix = Mat::Zero(2 * n_c, dim_v);
    for (int i = 0; i < n_c; ++i) {
        const int node = a.gamma3_nodes[i];
        a.normals[i] = normal_acc[node].normalized();
        a.tangents[i] = Eigen::Vector2d(-a.normals[i][1], a.normals[i][0]);
        a.boundary_mass[i] = bmass[node];
        const int f = a.node_to_free[node];
        a.trace_matrix(2 * i, 2 * f) = 1.0;
        a.trace_matrix(2 * i + 1, 2 * f + 1) = 1.0;
    }

    Mat gram_y = stiff_scalar;
    gram_y.diagonal() += lumped_scalar;
    a.space_V = std::make_shared<DiscreteSpace>(SpaceLabel::V, gram_eps, mass_vector);
    a.space_Y = std::make_shared<DiscreteSpace>(SpaceLabel::Y, gram_y,
                                                Mat(lumped_scalar.asDiagonal()));
    if (n_c > 0) {
        Mat gram_w = a.boundary_mass.asDiagonal();
        a.space_W = std::make_shared<DiscreteSpace>(SpaceLabel::W, gram_w, gram_w);
    } else {
        a.space_W = std::make_shared<DiscreteSpace>(SpaceLabel::W, Mat::Identity(1, 1),
                                                    Mat::Identity(1, 1));
    }

    a.stiffness = std::move(stiffness);
    a.gram_eps = a.space_V->gram_primary();
    a.coupling_div = std::move(coupling);
    a.stiffness_scalar = std::move(stiff_scalar);
    a.lumped_mass_scalar = std::move(lumped_scalar);

    require(model.contact.gap >= 0.0, "contact model: gap bound g must be >= 0");
    if (n_c > 0) {
        Mat constraints = Mat::Zero(n_c, dim_v);
        for (int i = 0; i < n_c; ++i) {
            const int f = a.node_to_free[a.gamma3_nodes[i]];
            constraints(i, 2 * f) = a.normals[i][0];
            constraints(i, 2 * f + 1) = a.normals[i][1];
        }
        a.K_V = make_halfspace_set_in_metric(a.space_V, constraints,
                                             Vec::Constant(n_c, model.contact.gap));
        Mat mass_x = Mat::Zero(2 * n_c, 2 * n_c);
        for (int i = 0; i < n_c; ++i) {
            mass_x(2 * i, 2 * i) = a.boundary_mass[i];
            mass_x(2 * i + 1, 2 * i + 1) = a.boundary_mass[i];
        }
        Eigen::GeneralizedSelfAdjointEigenSolver<Mat> ges(
            a.trace_matrix.transpose() * mass_x * a.trace_matrix, a.gram_eps);
        a.trace_norm = std::sqrt(std::max(0.0, ges.eigenvalues().maxCoeff()));
    } else {
        a.K_V = make_whole_space_set();
        a.trace_norm = 0.0;
    }
    a.K_Y = make_unit_interval_set();
    return asm_out;
}

namespace {

JSpec make_contact_jspec(std::shared_ptr<const Assembly> a, const ContactParams& cp) {
    const Eigen::Vector2d v_star(cp.v_star[0], cp.v_star[1]);
    require(v_star.norm() > 0.0, "contact model: foundation velocity must be nonzero");
    const Eigen::Vector2d n_star = -v_star.normalized();
    const double mu_f = cp.friction_mu;

    auto node_loads = [a, n_star, mu_f, cp](const Vec& w, const Vec& z) {
        const int nc = a->contact_count();
        const Vec z_nu = a->normal_components(z);
        Mat loads(nc, 2); // per-node traction density (before mass weighting)
        for (int i = 0; i < nc; ++i) {
            const double p = normal_compliance(w[i], z_nu[i], cp);
            const Eigen::Vector2d t =
                mu_f * p * n_star.dot(a->tangents[i]) * a->tangents[i] + p * a->normals[i];
            loads.row(i) = t.transpose();
        }
        return loads;
    };

    JSpec j;
    j.linear_in_v = true;
    j.evaluate = [a, node_loads](const Vec& w, const Vec& z, const Vec& v) {
        const Mat loads = node_loads(w, z);
        double sum = 0.0;
        for (int i = 0; i < a->contact_count(); ++i)
            sum += a->boundary_mass[i] *
                   (loads(i, 0) * v[2 * i] + loads(i, 1) * v[2 * i + 1]);
        return sum;
    };
    j.gradient_in_v = [a, node_loads](const Vec& w, const Vec& z) {
        const Mat loads = node_loads(w, z);
        Vec x = Vec::Zero(2 * a->contact_count());
        for (int i = 0; i < a->contact_count(); ++i) {
            x[2 * i] = a->boundary_mass[i] * loads(i, 0);
            x[2 * i + 1] = a->boundary_mass[i] * loads(i, 1);
        }
        return (a->trace_matrix.transpose() * x).eval();
    };
    j.prox = [a, node_loads](const Vec& w, const Vec& z, const Vec& point, double step) {
        // Linear functional: prox is a translation in the lumped trace metric.
        const Mat loads = node_loads(w, z);
        Vec out = point;
        for (int i = 0; i < a->contact_count(); ++i) {
            out[2 * i] -= step * loads(i, 0);
            out[2 * i + 1] -= step * loads(i, 1);
        }
        return out;
    };
    j.trace = [a](const Vec& u) { return (a->trace_matrix * u).eval(); };
    j.trace_adjoint = [a](const Vec& x) { return (a->trace_matrix.transpose() * x).eval(); };
    return j;
}

} // namespace

CompiledContact compile(const ContactModel& model, double horizon,
                        bool allow_margin_violation) {
    require(horizon > 0.0, "compile: horizon must be positive");
    require(model.zeta0 > 0.0 && model.zeta0 < 1.0, "compile: zeta0 must be in (0,1)");
    require(model.damage.zeta_floor > 0.0 && model.damage.zeta_floor < model.zeta0,
            "compile: zeta floor must be in (0, zeta0)");
    require(model.damage.kappa > 0.0, "compile: kappa must be positive");
    require(model.contact.friction_mu >= 0.0 && model.contact.wear_k >= 0.0,
            "compile: friction and wear coefficients must be >= 0");

    CompiledContact cc;
    cc.model = model;
    cc.assembly = assemble_spaces(model);
    const auto a = cc.assembly;
    const MaterialParams& mat = model.material;
    const ContactParams& cp = model.contact;
    const DamageParams& dp = model.damage;

    // Load vectors: exact P1 quadrature of the constant body force and the
    // constant tag-2 traction, with an optional linear start-up ramp.
    Vec base_load = Vec::Zero(a->dim_V());
    const Eigen::Vector2d f0(model.loads.body_force[0], model.loads.body_force[1]);
    for (const ElementData& e : a->elements)
        for (int k = 0; k < 3; ++k) {
            const int f = a->node_to_free[e.nodes[k]];
            if (f < 0) continue;
            base_load[2 * f] += e.area / 3.0 * f0[0];
            base_load[2 * f + 1] += e.area / 3.0 * f0[1];
        }
    const Eigen::Vector2d f2(model.loads.traction[0], model.loads.traction[1]);
    for (const BoundaryEdge& be : model.mesh.boundary) {
        if (be.tag != 2) continue;
        const double len =
            (model.mesh.nodes.row(be.b) - model.mesh.nodes.row(be.a)).norm();
        for (int node : {be.a, be.b}) {
            const int f = a->node_to_free[node];
            if (f < 0) continue;
            base_load[2 * f] += 0.5 * len * f2[0];
            base_load[2 * f + 1] += 0.5 * len * f2[1];
        }
    }
    const double ramp_time = model.loads.ramp_time;

    DqviProblem p;
    p.space_V = a->space_V;
    p.space_Y = a->space_Y;
    p.space_W = a->space_W;
    p.K_V = a->K_V;
    p.K_Y = a->K_Y;

    p.op_A = [a](double, const Vec& u) { return (a->stiffness * u).eval(); };
    const double theta_v = mat.viscosity_scale;
    require(theta_v > 0.0, "compile: viscosity scale must be positive");
    p.op_C = [a, theta_v](double, const Vec& v) { return (theta_v * a->stiffness * v).eval(); };
    const double tau_r = mat.relax_time;
    require(tau_r > 0.0, "compile: relaxation time must be positive");
    const double c_b = mat.relax_strain_coeff, c_z = mat.relax_damage_coeff;
    require(c_b >= 0.0 && c_z >= 0.0, "compile: relaxation coefficients must be >= 0");
    p.op_B = [a, tau_r, c_b, c_z](double lag, const Vec& u, const Vec& zeta) {
        const double decay = std::exp(-lag / tau_r);
        return (decay * (c_b * (a->gram_eps * u) + c_z * (a->coupling_div * zeta))).eval();
    };

    const double alpha_wear = cp.wear_k * Eigen::Vector2d(cp.v_star[0], cp.v_star[1]).norm();
    p.op_F = [a, cp, alpha_wear](double, const Vec& w, const Vec& udot) {
        const Vec r_nu = a->normal_components(a->trace_matrix * udot);
        Vec rate(a->contact_count());
        for (int i = 0; i < a->contact_count(); ++i)
            rate[i] = alpha_wear * (cp.wear_difference_form
                                        ? normal_compliance(0.0, r_nu[i] - w[i], cp)
                                        : normal_compliance(w[i], r_nu[i], cp));
        return rate;
    };

    p.op_phi = [a, dp](double, const Vec& u, const Vec& zeta) {
        const Vec strain_sq = a->recovered_strain_square(u);
        Vec phi(a->dim_Y());
        for (int i = 0; i < a->dim_Y(); ++i) {
            const double z = std::max(zeta[i], dp.zeta_floor);
            phi[i] = dp.lambda_D * (1.0 - z) / z - 0.5 * dp.lambda_E * strain_sq[i] +
                     dp.lambda_w;
        }
        return phi;
    };

    p.form_a = dp.kappa * a->stiffness_scalar;
    p.j = a->contact_count() > 0 ? make_contact_jspec(a, cp) : make_zero_jspec(a->dim_V());
    p.forcing = [base_load, ramp_time](double t) {
        const double factor = ramp_time > 0.0 ? std::min(t / ramp_time, 1.0) : 1.0;
        return (factor * base_load).eval();
    };

    Vec u0 = Vec::Zero(a->dim_V());
    for (int f = 0; f < static_cast<int>(a->free_nodes.size()); ++f) {
        u0[2 * f] = model.u0[0];
        u0[2 * f + 1] = model.u0[1];
    }
    p.initial.u0 = a->K_V.project(u0);
    require((p.initial.u0 - u0).norm() <= 1e-12 * std::max(1.0, u0.norm()),
            "compile: initial displacement violates the contact bound");
    p.initial.w0 = Vec::Zero(a->dim_W());
    p.initial.zeta0 = Vec::Constant(a->dim_Y(), model.zeta0);

    // Declared constants: assembled operator norms of the linear choices,
    // trace-scaled bounds for the boundary terms.
    ProblemConstants& c = p.constants;
    c.T = horizon;
    c.L_A = 2.0 * (mat.lame_mu + mat.lame_lambda);
    c.m_C = 2.0 * mat.lame_mu * theta_v;
    c.L_C1 = c.L_A * theta_v;
    c.L_C2 = 0.0;

    double coupling_norm = 0.0;
    if (c_z > 0.0) {
        Eigen::GeneralizedSelfAdjointEigenSolver<Mat> ges(
            a->coupling_div.transpose() *
                a->space_V->gram_primary().llt().solve(a->coupling_div),
            a->space_Y->gram_primary());
        coupling_norm = std::sqrt(std::max(0.0, ges.eigenvalues().maxCoeff()));
    }
    c.L_B = std::max(c_b, c_z * coupling_norm);
    c.rho_bound = c.L_B;

    const double lp = cp.k_n * std::max(1.0, cp.a_w);
    const double ctr = a->trace_norm;
    c.alpha0 = (cp.friction_mu + 1.0) * lp * ctr;
    c.alpha1 = (cp.friction_mu + 1.0) * lp * ctr * ctr;
    c.L_F = std::sqrt(2.0) * alpha_wear * lp * std::max(1.0, ctr);

    // The damage source is audited on the unit-scale sampling ball; the strain
    // term is only locally Lipschitz, so its slope is declared for |u|_V <= 2.
    const double strain_radius = 2.0;
    c.L_phi = std::max(dp.lambda_D / (dp.zeta_floor * dp.zeta_floor),
                       dp.lambda_E * strain_radius * std::sqrt(a->domain_area) /
                           a->min_element_area);
    c.a1 = dp.kappa;
    c.a2 = dp.kappa;

    cc.theorem_margin = c.m_C - (cp.friction_mu + 1.0) * lp;
    if (cc.theorem_margin <= 0.0) {
        cc.margin_warning = true;
        std::ostringstream os;
        os << "viscosity margin violated: m_C = " << c.m_C
           << " <= (|mu|+1)*L_p = " << (cp.friction_mu + 1.0) * lp
           << "; the coupling loops may diverge";
        cc.warning = os.str();
    }

    cc.problem = make_validated(std::move(p), allow_margin_violation);
    return cc;
}

ComplementarityReport complementarity_residuals(const CompiledContact& cc,
                                                const Trajectory& traj, int n) {
    const auto& a = *cc.assembly;
    require(n >= 1 && n < static_cast<int>(traj.states.size()),
            "complementarity_residuals: step index out of range");
    const DqviProblem& p = cc.problem;
    const double dt = traj.grid.dt();
    const double t_n = traj.grid.t(n);

    Vec hist = Vec::Zero(a.dim_V());
    for (int i = 0; i <= n; ++i) {
        const double weight = (i == 0 || i == n) ? 0.5 : 1.0;
        hist += weight * dt *
                p.op_B(t_n - traj.grid.t(i), traj.states[i].u, traj.states[i].zeta);
    }
    const State& s = traj.states[n];
    const Vec residual = p.op_A(t_n, s.u) + hist + p.op_C(t_n, s.udot) - p.forcing(t_n);

    const int nc = a.contact_count();
    ComplementarityReport rep;
    rep.udot_nu = a.normal_components(a.trace_matrix * s.udot);
    rep.sigma_nu.resize(nc);
    rep.pressure.resize(nc);
    const double g = cc.model.contact.gap;
    for (int i = 0; i < nc; ++i) {
        const int f = a.node_to_free[a.gamma3_nodes[i]];
        const Eigen::Vector2d t_node(residual[2 * f], residual[2 * f + 1]);
        rep.sigma_nu[i] = t_node.dot(a.normals[i]) / a.boundary_mass[i];
        rep.pressure[i] = normal_compliance(s.w[i], rep.udot_nu[i], cc.model.contact);
        rep.force_scale = std::max({rep.force_scale, std::abs(rep.sigma_nu[i]),
                                    rep.pressure[i]});
        rep.max_gap_violation = std::max(rep.max_gap_violation, rep.udot_nu[i] - g);
        const double slack = rep.sigma_nu[i] + rep.pressure[i];
        rep.max_positive_residual = std::max(rep.max_positive_residual, slack);
        rep.max_complementarity =
            std::max(rep.max_complementarity, std::abs((rep.udot_nu[i] - g) * slack));
    }
    rep.force_scale = std::max(rep.force_scale, 1e-12);
    return rep;
}

} // namespace contact2d
} // namespace dqvi
