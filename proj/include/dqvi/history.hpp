#pragma once

#include "dqvi/time_grid.hpp"
#include "dqvi/types.hpp"

#include <functional>
#include <vector>

namespace dqvi {

using HistoryKernel = std::function<Vec(double lag, const Vec& u, const Vec& zeta)>;

/// Stores the (u, zeta) trajectory on the Rothe grid for the Volterra term.
/// Full-history storage: capacity N+1 nodes, appended in time order.
class HistoryBuffer {
public:
    HistoryBuffer(TimeGrid grid, int dim_v, int dim_y);

    void append(Vec u, Vec zeta);
    int length() const { return static_cast<int>(u_samples_.size()); }
    int capacity() const { return grid_.N + 1; }
    const TimeGrid& grid() const { return grid_; }
    const Vec& u(int i) const;
    const Vec& zeta(int i) const;

private:
    TimeGrid grid_;
    int dim_v_;
    int dim_y_;
    std::vector<Vec> u_samples_;
    std::vector<Vec> zeta_samples_;
};

/// Composite trapezoid for int_0^{t_n} B(t_n - s, u(s), zeta(s)) ds using the
/// stored nodes 0..n. Exactly zero at n = 0.
Vec history_term(const HistoryBuffer& buf, const HistoryKernel& op_B, int n);

/// Same quadrature, but the endpoint node n is taken from the supplied
/// not-yet-accepted iterate instead of the buffer (the implicit fixed point of
/// the velocity loop). Stored nodes 0..n-1 must exist.
Vec history_term_with_endpoint(const HistoryBuffer& buf, const HistoryKernel& op_B, int n,
                               const Vec& u_n, const Vec& zeta_n);

} // namespace dqvi
