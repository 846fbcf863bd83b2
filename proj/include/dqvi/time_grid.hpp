#pragma once

#include "dqvi/types.hpp"

namespace dqvi {

/// Uniform Rothe partition 0 = t_0 < ... < t_N = T.
struct TimeGrid {
    double T = 0.0;
    int N = 0;

    TimeGrid() = default;
    TimeGrid(double horizon, int steps) : T(horizon), N(steps) {
        require(T > 0.0, "TimeGrid: horizon T must be positive");
        require(N >= 1, "TimeGrid: step count N must be >= 1");
    }

    double dt() const { return T / N; }
    double t(int i) const { return i * dt(); }
};

} // namespace dqvi
