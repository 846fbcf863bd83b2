#include "dqvi/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace dqvi {

namespace {

void check_spd(const Mat& g, const Eigen::LLT<Mat>& llt, const char* which) {
    require(g.rows() == g.cols(), std::string(which) + " Gram matrix must be square");
    const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
    const double asym = (g - g.transpose()).cwiseAbs().maxCoeff();
    require(asym <= 1e-12 * scale, std::string(which) + " Gram matrix not symmetric");
    if (llt.info() != Eigen::Success)
        throw InvalidInputError(std::string(which) + " Gram matrix not positive definite");
}

} // namespace

DiscreteSpace::DiscreteSpace(SpaceLabel label, Mat gram_primary, Mat gram_pivot)
    : label_(label),
      gram_primary_(std::move(gram_primary)),
      gram_pivot_(std::move(gram_pivot)) {
    require(gram_primary_.rows() == gram_pivot_.rows(),
            "DiscreteSpace: primary/pivot dimension mismatch");
    llt_primary_.compute(gram_primary_);
    llt_pivot_.compute(gram_pivot_);
    check_spd(gram_primary_, llt_primary_, "primary");
    check_spd(gram_pivot_, llt_pivot_, "pivot");
}

void DiscreteSpace::check_dimension(const Vec& x) const {
    require(x.size() == gram_primary_.rows(), "DiscreteSpace: array dimension mismatch");
}

double DiscreteSpace::inner_primary(const Vec& x, const Vec& y) const {
    check_dimension(x);
    check_dimension(y);
    return x.dot(gram_primary_ * y);
}

double DiscreteSpace::inner_pivot(const Vec& x, const Vec& y) const {
    check_dimension(x);
    check_dimension(y);
    return x.dot(gram_pivot_ * y);
}

double DiscreteSpace::norm_primary(const Vec& x) const {
    return std::sqrt(std::max(0.0, inner_primary(x, x)));
}

double DiscreteSpace::norm_pivot(const Vec& x) const {
    return std::sqrt(std::max(0.0, inner_pivot(x, x)));
}

Vec DiscreteSpace::riesz(const Vec& f) const {
    check_dimension(f);
    return llt_primary_.solve(f);
}

double DiscreteSpace::dual_norm(const Vec& f) const {
    check_dimension(f);
    return std::sqrt(std::max(0.0, f.dot(llt_primary_.solve(f))));
}

double norm(const DiscreteSpace& space, const Vec& x, WhichNorm which) {
    return which == WhichNorm::primary ? space.norm_primary(x) : space.norm_pivot(x);
}

Vec project_box_normal(const Vec& values, double g,
                       const std::vector<int>& normal_indices) {
    require(g >= 0.0, "project_box_normal: bound g must be nonnegative");
    Vec out = values;
    for (int idx : normal_indices) {
        require(idx >= 0 && idx < values.size(), "project_box_normal: index out of range");
        out[idx] = std::min(out[idx], g);
    }
    return out;
}

Vec project_unit_interval(const Vec& values) {
    return values.cwiseMax(0.0).cwiseMin(1.0);
}

ConvexSet make_whole_space_set() {
    ConvexSet s;
    s.project = [](const Vec& x) { return x; };
    s.description = "whole space";
    return s;
}

ConvexSet make_box_normal_set(double g, std::vector<int> normal_indices) {
    require(g >= 0.0, "box_normal set: bound g must be nonnegative");
    ConvexSet s;
    s.project = [g, idx = std::move(normal_indices)](const Vec& x) {
        return project_box_normal(x, g, idx);
    };
    s.description = "nodal normal clamp, bound " + std::to_string(g);
    return s;
}

ConvexSet make_unit_interval_set() {
    ConvexSet s;
    s.project = [](const Vec& x) { return project_unit_interval(x); };
    s.description = "entrywise [0,1] clamp";
    return s;
}

ConvexSet make_box_set(Vec lo, Vec hi) {
    require(lo.size() == hi.size(), "box set: bound dimension mismatch");
    require((lo.array() <= hi.array()).all(), "box set: lo must not exceed hi");
    ConvexSet s;
    s.project = [lo = std::move(lo), hi = std::move(hi)](const Vec& x) {
        require(x.size() == lo.size(), "box set: array dimension mismatch");
        return x.cwiseMax(lo).cwiseMin(hi).eval();
    };
    s.description = "box clamp";
    return s;
}

ConvexSet make_halfspace_set_in_metric(std::shared_ptr<const DiscreteSpace> space,
                                       Mat constraints, Vec bounds) {
    require(space != nullptr, "halfspace set: null space");
    require(constraints.cols() == space->dim(), "halfspace set: constraint width mismatch");
    require(constraints.rows() == bounds.size(), "halfspace set: bounds count mismatch");

    // Dual pre-factorization: S = N G^{-1} N'. Each projection solves
    //   min 0.5 l'Sl - l'(N y - b), l >= 0
    // by coordinate descent, then x = y - G^{-1} N' l.
    const int nc = static_cast<int>(constraints.rows());
    Mat ginv_nt(space->dim(), nc);
    for (int i = 0; i < nc; ++i)
        ginv_nt.col(i) = space->riesz(constraints.row(i).transpose());
    Mat s_dual = constraints * ginv_nt;

    ConvexSet s;
    s.project = [space, n = std::move(constraints), b = std::move(bounds),
                 ginv_nt = std::move(ginv_nt), s_dual = std::move(s_dual),
                 nc](const Vec& y) -> Vec {
        require(y.size() == space->dim(), "halfspace set: array dimension mismatch");
        Vec viol = n * y - b;
        if ((viol.array() <= 0.0).all()) return y;
        Vec lambda = Vec::Zero(nc);
        const double scale = std::max(1.0, viol.cwiseAbs().maxCoeff());
        for (int sweep = 0; sweep < 200 * nc + 200; ++sweep) {
            double change = 0.0;
            for (int i = 0; i < nc; ++i) {
                double r = viol[i] - s_dual.row(i).dot(lambda) + s_dual(i, i) * lambda[i];
                double li = std::max(0.0, r / s_dual(i, i));
                change = std::max(change, std::abs(li - lambda[i]));
                lambda[i] = li;
            }
            if (change <= 1e-15 * scale) break;
        }
        return y - ginv_nt * lambda;
    };
    s.description = "metric projection onto nodal half-space constraints";
    return s;
}

} // namespace dqvi
