#pragma once

#include "dqvi/problem.hpp"

#include <string>
#include <vector>

namespace dqvi {

/// Named abstract instances usable from the CLI and tests:
///   "zero"      1-D, identity-Gram viscosity, all data zero; the trajectory
///               stays at rest.
///   "linear1d"  1-D fully coupled linear instance with inactive sets; smooth
///               data for convergence and stability studies.
DqviProblem make_builtin_problem(const std::string& name);

std::vector<std::string> builtin_problem_names();

} // namespace dqvi
