#pragma once

#include "dqvi/mesh.hpp"
#include "dqvi/problem.hpp"
#include "dqvi/stepper.hpp"

#include <array>
#include <memory>
#include <string>
#include <vector>

namespace dqvi {
namespace contact2d {

/// Isotropic elasticity tensor plus the bundled viscosity and relaxation
/// choices: C = viscosity_scale * A, B(lag, eps, zeta) =
/// exp(-lag/relax_time) * (relax_strain_coeff * eps + relax_damage_coeff * zeta * Id).
struct MaterialParams {
    double lame_lambda = 1.0;
    double lame_mu = 1.0;
    double viscosity_scale = 1.0;
    double relax_time = 1.0;
    double relax_strain_coeff = 0.0;
    double relax_damage_coeff = 0.0;
};

struct ContactParams {
    double k_n = 1.0;      // compliance stiffness
    double p_max = 10.0;   // pressure saturation
    double a_w = 0.0;      // wear coupling inside the compliance
    double gap = 0.0;      // bound g on the normal velocity, g >= 0
    double friction_mu = 0.0;
    double wear_k = 0.0;   // Archard coefficient
    std::array<double, 2> v_star{1.0, 0.0}; // foundation velocity (constant path)
    bool wear_difference_form = false;      // rate alpha * p(udot_nu - w)
};

struct DamageParams {
    double kappa = 1.0; // microcrack diffusion
    double lambda_D = 1.0;
    double lambda_E = 1.0;
    double lambda_w = 1.0;
    double zeta_floor = 0.01; // singularity floor for (1 - zeta)/zeta
};

struct LoadParams {
    std::array<double, 2> body_force{0.0, 0.0};
    std::array<double, 2> traction{0.0, 0.0}; // on the tag-2 boundary
    double ramp_time = 0.0;                   // loads scaled by min(t/ramp, 1) when > 0
};

struct ContactModel {
    Mesh2D mesh;
    MaterialParams material;
    ContactParams contact;
    DamageParams damage;
    LoadParams loads;
    std::array<double, 2> u0{0.0, 0.0}; // uniform initial displacement of free nodes
    double zeta0 = 0.9;                 // uniform initial damage, in (0,1)
};

/// Normal compliance p(w, r) = k_n * clamp(pos(r) + a_w * pos(w), 0, p_max).
/// Lipschitz with constant k_n * max(1, a_w); vanishes at (0, 0).
double normal_compliance(double w, double r, const ContactParams& c);

struct ElementData {
    std::array<int, 3> nodes;
    double area = 0.0;
    Eigen::Matrix<double, 3, 6> strain_matrix; // Voigt (e_xx, e_yy, gamma_xy)
};

/// Assembled discrete structure behind the operator handles.
struct Assembly {
    std::shared_ptr<const DiscreteSpace> space_V;
    std::shared_ptr<const DiscreteSpace> space_Y;
    std::shared_ptr<const DiscreteSpace> space_W;
    ConvexSet K_V;
    ConvexSet K_Y;

    std::vector<int> node_to_free; // -1 when clamped
    std::vector<int> free_nodes;
    std::vector<int> gamma3_nodes; // free mesh nodes on the contact boundary
    std::vector<Eigen::Vector2d> normals;
    std::vector<Eigen::Vector2d> tangents;
    Vec boundary_mass; // lumped, one entry per contact node

    Mat trace_matrix;     // (2 n_c) x dim_V selection of contact dofs
    Mat stiffness;        // elasticity operator matrix
    Mat gram_eps;         // <eps(u), eps(v)> Gram (V primary)
    Mat coupling_div;     // dim_V x dim_Y damage-dilatation coupling
    Mat stiffness_scalar; // dim_Y x dim_Y
    Vec lumped_mass_scalar;
    std::vector<ElementData> elements;
    Vec node_patch_area; // per mesh node, for strain recovery

    double domain_area = 0.0;
    double min_element_area = 0.0;
    double trace_norm = 0.0; // discrete norm of the contact trace operator

    int dim_V() const { return space_V->dim(); }
    int dim_Y() const { return space_Y->dim(); }
    int dim_W() const { return space_W->dim(); }
    int contact_count() const { return static_cast<int>(gamma3_nodes.size()); }

    /// Normal components of a trace array, one per contact node.
    Vec normal_components(const Vec& trace_values) const;
    /// Area-weighted element-average of |eps(u)|^2 scattered to mesh nodes.
    Vec recovered_strain_square(const Vec& u) const;
};

std::shared_ptr<const Assembly> assemble_spaces(const ContactModel& model);

struct CompiledContact {
    DqviProblem problem;
    std::shared_ptr<const Assembly> assembly;
    ContactModel model;
    double theorem_margin = 0.0; // m_C - (|mu|_inf + 1) * L_p at tensor level
    bool margin_warning = false;
    std::string warning;
};

/// Compiles the mesh and parameters into the abstract problem bundle. The
/// declared constants are assembled operator norms. A violated tensor-level
/// margin only warns; a violated discrete margin m_C <= alpha_1 throws unless
/// allow_margin_violation is set (negative tests).
CompiledContact compile(const ContactModel& model, double horizon,
                        bool allow_margin_violation = false);

/// Per-node residuals of the discrete contact complementarity at an accepted
/// step: the normal traction recovered from the equilibrium residual must
/// satisfy sigma_nu + p <= 0, udot_nu <= g, and (udot_nu - g)(sigma_nu + p) = 0
/// up to solver tolerance.
struct ComplementarityReport {
    Vec udot_nu;      // normal velocities
    Vec sigma_nu;     // recovered normal tractions
    Vec pressure;     // p(w, udot_nu)
    double force_scale = 0.0;
    double max_gap_violation = 0.0;     // max(udot_nu - g)
    double max_positive_residual = 0.0; // max(sigma_nu + p)
    double max_complementarity = 0.0;   // max |(udot_nu - g)(sigma_nu + p)|
};

ComplementarityReport complementarity_residuals(const CompiledContact& cc,
                                                const Trajectory& traj, int n);

} // namespace contact2d
} // namespace dqvi
