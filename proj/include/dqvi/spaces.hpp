#pragma once

#include "dqvi/types.hpp"

#include <Eigen/Cholesky>

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace dqvi {

enum class SpaceLabel { V, Y, W };

enum class WhichNorm { primary, pivot };

/// Finite-dimensional realization of one leg of a Gelfand triple.
///
/// The primary Gram matrix defines the strong norm (e.g. the strain-energy
/// inner product on V, the H1 inner product on Y); the pivot Gram matrix
/// defines the pivot-space norm (L2 mass). Dual elements are stored as load
/// arrays whose pairing with a primal array is the plain dot product, so the
/// dual norm is taken through the inverse primary Gram.
class DiscreteSpace {
public:
    DiscreteSpace(SpaceLabel label, Mat gram_primary, Mat gram_pivot);

    SpaceLabel label() const { return label_; }
    int dim() const { return static_cast<int>(gram_primary_.rows()); }

    const Mat& gram_primary() const { return gram_primary_; }
    const Mat& gram_pivot() const { return gram_pivot_; }

    double inner_primary(const Vec& x, const Vec& y) const;
    double inner_pivot(const Vec& x, const Vec& y) const;
    double norm_primary(const Vec& x) const;
    double norm_pivot(const Vec& x) const;

    /// Riesz map: solves G z = f for a dual element f, metric = primary Gram.
    Vec riesz(const Vec& f) const;

    /// Dual norm ||f||_* = sqrt(f' G^{-1} f) in the primary metric.
    double dual_norm(const Vec& f) const;

private:
    void check_dimension(const Vec& x) const;

    SpaceLabel label_;
    Mat gram_primary_;
    Mat gram_pivot_;
    Eigen::LLT<Mat> llt_primary_;
    Eigen::LLT<Mat> llt_pivot_;
};

double norm(const DiscreteSpace& space, const Vec& x, WhichNorm which);

/// Duality pairing <f, v> for a load array f and a primal array v.
/// Bit-exact by the representation convention.
inline double dual_pairing(const Vec& f, const Vec& v) {
    require(f.size() == v.size(), "dual_pairing: dimension mismatch");
    return f.dot(v);
}

/// A closed convex set given through its projection map. The projection is
/// idempotent in a declared inner product (Euclidean/lumped for plain clamp
/// sets, the space's primary metric for the half-space sets below).
struct ConvexSet {
    std::function<Vec(const Vec&)> project;
    double membership_tol = 1e-10;
    std::string description;

    bool contains(const Vec& x) const {
        return (project(x) - x).norm() <= membership_tol;
    }
};

/// Clamp entries at normal_indices to <= g; other entries untouched.
/// Exact projection in any diagonal (lumped) metric. Requires g >= 0 so the
/// zero element stays feasible.
Vec project_box_normal(const Vec& values, double g,
                       const std::vector<int>& normal_indices);

/// Entrywise clamp to [0, 1]; exact projection in any lumped metric.
Vec project_unit_interval(const Vec& values);

ConvexSet make_whole_space_set();
ConvexSet make_box_normal_set(double g, std::vector<int> normal_indices);
ConvexSet make_unit_interval_set();
ConvexSet make_box_set(Vec lo, Vec hi);

/// Exact metric projection onto { x : N x <= bounds } in the primary inner
/// product of `space` (dual coordinate-descent on the multiplier QP). Used for
/// the contact set K_V where the nodal normal constraints couple through the
/// strain-energy Gram.
ConvexSet make_halfspace_set_in_metric(std::shared_ptr<const DiscreteSpace> space,
                                       Mat constraints, Vec bounds);

} // namespace dqvi
