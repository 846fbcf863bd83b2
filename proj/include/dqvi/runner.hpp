#pragma once

#include "dqvi/config.hpp"
#include "dqvi/hypotheses.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dqvi {

/// Problem built from a config: either a builtin abstract instance or a
/// compiled contact model (kept alongside for contact-specific reporting).
struct ProblemHandle {
    DqviProblem problem;
    std::optional<contact2d::CompiledContact> contact;
};

ProblemHandle build_problem(const RunConfig& cfg, bool allow_margin_violation);

struct RunArtifacts {
    int exit_code = 0;
    RunResult result;
    std::string trajectory_path;
    std::string diagnostics_path;
    std::string summary_path;
    std::string message;
};

/// Runs the configured problem and writes trajectory.csv, diagnostics.csv and
/// summary.txt under out_dir. Partial outputs are retained on step failure.
RunArtifacts cmd_run(const RunConfig& cfg, const std::string& out_dir);

struct ConvergenceRow {
    int level = 0;
    int steps = 0;
    double diff = 0.0;   // sup-node V-norm difference to the next refinement
    double order = 0.0;  // log2 of successive diff ratio
    bool has_diff = false;
    bool has_order = false;
    bool exact = false;  // successive runs identical
};

struct ConvergenceArtifacts {
    int exit_code = 0;
    std::vector<ConvergenceRow> rows;
    std::string table_path;
    std::string message;
};

/// Self-convergence study at N, 2N, ..., 2^(levels-1) N.
ConvergenceArtifacts cmd_convergence(const RunConfig& cfg, const std::string& out_dir,
                                     int levels);

struct ValidateArtifacts {
    int exit_code = 0;
    HypothesisReport report;
    std::string text;
};

/// Hypothesis audit plus margin reporting; exit 0 iff every check passes and
/// all margins are positive.
ValidateArtifacts cmd_validate(const RunConfig& cfg, int samples = 200);

/// 17-significant-digit formatting, round-trip exact for doubles.
std::string fmt17(double v);

} // namespace dqvi
