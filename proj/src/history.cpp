#include "dqvi/history.hpp"

#include <utility>

namespace dqvi {

HistoryBuffer::HistoryBuffer(TimeGrid grid, int dim_v, int dim_y)
    : grid_(grid), dim_v_(dim_v), dim_y_(dim_y) {
    require(dim_v_ >= 1 && dim_y_ >= 1, "HistoryBuffer: dimensions must be positive");
    u_samples_.reserve(capacity());
    zeta_samples_.reserve(capacity());
}

void HistoryBuffer::append(Vec u, Vec zeta) {
    if (length() >= capacity())
        throw InvalidInputError("HistoryBuffer: overflow beyond N+1 nodes");
    require(u.size() == dim_v_, "HistoryBuffer: u dimension mismatch");
    require(zeta.size() == dim_y_, "HistoryBuffer: zeta dimension mismatch");
    u_samples_.push_back(std::move(u));
    zeta_samples_.push_back(std::move(zeta));
}

const Vec& HistoryBuffer::u(int i) const {
    require(i >= 0 && i < length(), "HistoryBuffer: node index out of range");
    return u_samples_[i];
}

const Vec& HistoryBuffer::zeta(int i) const {
    require(i >= 0 && i < length(), "HistoryBuffer: node index out of range");
    return zeta_samples_[i];
}

namespace {

Vec trapezoid(const HistoryBuffer& buf, const HistoryKernel& op_B, int n,
              const Vec* u_end, const Vec* zeta_end) {
    const int stored_needed = u_end ? n : n + 1;
    require(n >= 0, "history_term: negative step index");
    require(buf.length() >= stored_needed, "history_term: nodes 0..n not stored");

    const double dt = buf.grid().dt();
    const double t_n = buf.grid().t(n);
    auto u_at = [&](int i) -> const Vec& {
        return (u_end && i == n) ? *u_end : buf.u(i);
    };
    auto zeta_at = [&](int i) -> const Vec& {
        return (zeta_end && i == n) ? *zeta_end : buf.zeta(i);
    };

    Vec acc = 0.0 * op_B(t_n, u_at(0), zeta_at(0));
    if (n == 0) return acc;
    for (int i = 0; i <= n; ++i) {
        const double weight = (i == 0 || i == n) ? 0.5 : 1.0;
        acc += (weight * dt) * op_B(t_n - buf.grid().t(i), u_at(i), zeta_at(i));
    }
    return acc;
}

} // namespace

Vec history_term(const HistoryBuffer& buf, const HistoryKernel& op_B, int n) {
    return trapezoid(buf, op_B, n, nullptr, nullptr);
}

Vec history_term_with_endpoint(const HistoryBuffer& buf, const HistoryKernel& op_B, int n,
                               const Vec& u_n, const Vec& zeta_n) {
    require(n >= 1, "history_term_with_endpoint: endpoint form needs n >= 1");
    return trapezoid(buf, op_B, n, &u_n, &zeta_n);
}

} // namespace dqvi
