#pragma once

#include "dqvi/problem.hpp"

#include <string>
#include <vector>

namespace dqvi {

struct HypothesisCheck {
    std::string name;
    double declared = 0.0;
    double observed = 0.0;
    /// observed/declared for upper bounds, declared/observed for lower bounds;
    /// a value > 1 means the declaration is violated.
    double worst_ratio = 0.0;
    bool pass = true;
    std::string detail;
};

struct HypothesisReport {
    std::vector<HypothesisCheck> checks;
    bool all_pass = true;
    double margin_m_alpha = 0.0; // m_C - alpha_1
    ContractionConstants contraction; // valid only when margin positive
    bool contraction_valid = false;

    const HypothesisCheck* find(const std::string& name) const;
    std::string summary() const;
};

/// Samples random tuples (t, u, v, zeta, w) and verifies every declared
/// constant dominates its empirical estimate. Violations become failed report
/// entries, never exceptions. Deterministic for a fixed seed.
HypothesisReport validate_hypotheses(const DqviProblem& p, int samples,
                                     unsigned long long rng_seed);

} // namespace dqvi
