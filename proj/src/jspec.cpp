#include "dqvi/jspec.hpp"

namespace dqvi {

JSpec make_zero_jspec(int dim_v) {
    JSpec j;
    j.evaluate = [](const Vec&, const Vec&, const Vec&) { return 0.0; };
    j.prox = [](const Vec&, const Vec&, const Vec& point, double) { return point; };
    j.linear_in_v = true;
    j.gradient_in_v = [dim_v](const Vec&, const Vec&) { return Vec::Zero(dim_v); };
    j.trace = [](const Vec& u) { return u; };
    j.trace_adjoint = [](const Vec& x) { return x; };
    return j;
}

JSpec make_scalar_bilinear_jspec(double c) {
    JSpec j;
    j.evaluate = [c](const Vec&, const Vec& z, const Vec& v) { return c * z[0] * v[0]; };
    j.prox = [c](const Vec&, const Vec& z, const Vec& point, double step) {
        Vec out = point;
        out[0] -= step * c * z[0];
        return out;
    };
    j.linear_in_v = true;
    j.gradient_in_v = [c](const Vec&, const Vec& z) {
        Vec g(1);
        g[0] = c * z[0];
        return g;
    };
    j.trace = [](const Vec& u) { return u; };
    j.trace_adjoint = [](const Vec& x) { return x; };
    return j;
}

} // namespace dqvi
