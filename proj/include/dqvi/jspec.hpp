#pragma once

#include "dqvi/types.hpp"

#include <functional>

namespace dqvi {

/// The contact functional j(w, z, v): first slot a wear-like W-array, second
/// and third slots boundary-trace arrays. The solver needs either the convex
/// prox of v -> j(w, z, v) or, when the functional is linear in v, the load
/// array of its gradient (already lifted to V* through the trace adjoint).
struct JSpec {
    /// j(w, z, v) with z, v given in trace coordinates.
    std::function<double(const Vec& w, const Vec& z, const Vec& v)> evaluate;

    /// Proximal map of v -> j(w, z, v) at `point` (trace coordinates) with the
    /// given step, taken in the trace-space metric.
    std::function<Vec(const Vec& w, const Vec& z, const Vec& point, double step)> prox;

    bool linear_in_v = false;

    /// When linear_in_v: the V*-array g with j(w, z, trace(v)) = <g, v>.
    std::function<Vec(const Vec& w, const Vec& z)> gradient_in_v;

    /// Trace map V-array -> trace array and its adjoint.
    std::function<Vec(const Vec& u)> trace;
    std::function<Vec(const Vec& x)> trace_adjoint;
};

/// j == 0 with identity trace; used by problems without a contact functional.
JSpec make_zero_jspec(int dim_v);

/// Scalar j(w, z, v) = c * z * v on a 1-D space (identity trace). Linear in v
/// with alpha_1 = |c|; handy for fixed-point algebra tests.
JSpec make_scalar_bilinear_jspec(double c);

} // namespace dqvi
