#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace dqvi {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Base class for all errors raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Rejected input: dimension mismatch, invalid argument values.
struct InvalidInputError : Error {
    using Error::Error;
};

/// Problem data violates a solvability requirement (e.g. m_C <= alpha_1).
struct InfeasibleError : Error {
    using Error::Error;
};

/// A time step could not be completed (non-contractive fixed point, etc.).
struct StepFailureError : Error {
    using Error::Error;
};

/// Config or mesh text could not be parsed; message carries location info.
struct ParseError : Error {
    using Error::Error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw InvalidInputError(msg);
}

} // namespace dqvi
