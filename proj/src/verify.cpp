#include "dqvi/verify.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace dqvi {
namespace verify {

namespace {

double objective(const OracleInstance& inst, const Vec& x) {
    double val = 0.5 * x.dot(inst.Q * x) - inst.rhs.dot(x);
    if (inst.extra_term) val += inst.extra_term(x);
    return val;
}

double kInfinity() { return std::numeric_limits<double>::infinity(); }

} // namespace

Vec brute_force_vi(const OracleInstance& inst, int grid_points) {
    const int dim = static_cast<int>(inst.Q.rows());
    require(dim >= 1 && dim <= 3, "brute_force_vi: dimension must be <= 3");
    require(grid_points >= 101, "brute_force_vi: grid_points must be >= 101");
    require(inst.rhs.size() == dim && inst.lo.size() == dim && inst.hi.size() == dim,
            "brute_force_vi: dimension mismatch");

    Eigen::LLT<Mat> llt(inst.Q);
    if (llt.info() != Eigen::Success)
        throw InvalidInputError("brute_force_vi: unbounded set with indefinite data rejected");

    // Finite search window: center at the clamped unconstrained minimizer and
    // widen by a conditioning-aware margin so the constrained minimizer cannot
    // escape the window.
    const Vec x_star = llt.solve(inst.rhs);
    Eigen::SelfAdjointEigenSolver<Mat> eig(inst.Q);
    const double cond = std::sqrt(eig.eigenvalues().maxCoeff() /
                                  std::max(eig.eigenvalues().minCoeff(), 1e-300));
    Vec center(dim);
    for (int i = 0; i < dim; ++i)
        center[i] = std::clamp(x_star[i], inst.lo[i], inst.hi[i]);
    const double half_width =
        2.0 * (1.0 + cond * std::sqrt(double(dim)) *
                         ((x_star - center).cwiseAbs().maxCoeff() +
                          x_star.cwiseAbs().maxCoeff() + 1.0));

    Vec lo(dim), hi(dim);
    for (int i = 0; i < dim; ++i) {
        lo[i] = std::max(inst.lo[i], center[i] - half_width);
        hi[i] = std::min(inst.hi[i], center[i] + half_width);
    }

    auto coord_value = [&](int i, int k, int count) {
        return count == 1 ? lo[i] : lo[i] + (hi[i] - lo[i]) * k / double(count - 1);
    };

    Vec best(dim);
    double best_val = std::numeric_limits<double>::infinity();
    Vec x(dim);
    const int g = grid_points;
    const int n1 = g, n2 = dim >= 2 ? g : 1, n3 = dim >= 3 ? g : 1;
    for (int a = 0; a < n1; ++a) {
        x[0] = coord_value(0, a, n1);
        for (int b = 0; b < n2; ++b) {
            if (dim >= 2) x[1] = coord_value(1, b, n2);
            for (int c = 0; c < n3; ++c) {
                if (dim >= 3) x[2] = coord_value(2, c, n3);
                const double val = objective(inst, x);
                if (val < best_val) {
                    best_val = val;
                    best = x;
                }
            }
        }
    }

    // One per-coordinate refinement pass: the 1-D restriction of the smooth
    // objective is minimized in closed form; with an extra convex term the
    // coordinate is scanned on a fine grid spanning one coarse cell.
    for (int i = 0; i < dim; ++i) {
        const double cell = (hi[i] - lo[i]) / double(g - 1);
        const double a = std::max(lo[i], best[i] - cell);
        const double b = std::min(hi[i], best[i] + cell);
        if (!inst.extra_term) {
            double off_diag = -inst.rhs[i];
            for (int k = 0; k < dim; ++k)
                if (k != i) off_diag += inst.Q(i, k) * best[k];
            const double xi = std::clamp(-off_diag / inst.Q(i, i), a, b);
            Vec trial = best;
            trial[i] = xi;
            const double val = objective(inst, trial);
            if (val < best_val) {
                best_val = val;
                best[i] = xi;
            }
        } else {
            const int fine = 2001;
            Vec trial = best;
            for (int k = 0; k < fine; ++k) {
                trial[i] = a + (b - a) * k / double(fine - 1);
                const double val = objective(inst, trial);
                if (val < best_val) {
                    best_val = val;
                    best[i] = trial[i];
                }
            }
        }
    }

    // Exact polish on the grid-identified active set (smooth objective only):
    // coordinates the grid parked at a bound stay clamped, the free block is
    // solved densely, and the candidate is accepted only when feasible and
    // strictly better, so the grid bound still limits the worst case.
    if (!inst.extra_term) {
        std::vector<int> free_idx;
        Vec clamped = best;
        for (int i = 0; i < dim; ++i) {
            const double cell = (hi[i] - lo[i]) / double(g - 1);
            if (inst.lo[i] > -kInfinity() && best[i] <= inst.lo[i] + cell)
                clamped[i] = inst.lo[i];
            else if (inst.hi[i] < kInfinity() && best[i] >= inst.hi[i] - cell)
                clamped[i] = inst.hi[i];
            else
                free_idx.push_back(i);
        }
        if (!free_idx.empty()) {
            const int nf = static_cast<int>(free_idx.size());
            Mat qff(nf, nf);
            Vec bf(nf);
            for (int r = 0; r < nf; ++r) {
                bf[r] = inst.rhs[free_idx[r]];
                for (int c = 0; c < nf; ++c) qff(r, c) = inst.Q(free_idx[r], free_idx[c]);
                for (int i = 0; i < dim; ++i)
                    if (std::find(free_idx.begin(), free_idx.end(), i) == free_idx.end())
                        bf[r] -= inst.Q(free_idx[r], i) * clamped[i];
            }
            const Vec xf = qff.llt().solve(bf);
            Vec candidate = clamped;
            bool feasible = true;
            for (int r = 0; r < nf; ++r) {
                candidate[free_idx[r]] = xf[r];
                feasible = feasible && xf[r] >= inst.lo[free_idx[r]] &&
                           xf[r] <= inst.hi[free_idx[r]];
            }
            if (feasible && objective(inst, candidate) < best_val) best = candidate;
        } else if (objective(inst, clamped) < best_val) {
            best = clamped;
        }
    }
    return best;
}

ContractionTrace measure_contraction(const std::function<Vec(const Vec&)>& map,
                                     const Vec& start, int iterations) {
    require(iterations >= 3, "measure_contraction: iterations must be >= 3");
    ContractionTrace trace;
    Vec prev = start;
    Vec cur = map(prev);
    double prev_diff = (cur - prev).norm();
    for (int k = 1; k < iterations; ++k) {
        Vec next = map(cur);
        const double diff = (next - cur).norm();
        if (prev_diff == 0.0) {
            trace.landed_on_fixed_point = true;
            break;
        }
        trace.ratios.push_back(diff / prev_diff);
        prev_diff = diff;
        prev = std::move(cur);
        cur = std::move(next);
    }
    return trace;
}

ManufacturedReference manufactured_linear_oracle(const DqviProblem& p, const TimeGrid& grid,
                                                 const StepperConfig& cfg, int refinement) {
    require(refinement >= 2, "manufactured_linear_oracle: refinement must be >= 2");
    ManufacturedReference out;

    TimeGrid fine(grid.T, grid.N * refinement);
    RunResult fine_run = run(p, fine, cfg);
    if (!fine_run.ok) {
        out.message = "reference run failed at step " + std::to_string(fine_run.failed_step) +
                      ": " + fine_run.failure;
        return out;
    }

    // Constraint-activity probe: a state this close to the boundary of its
    // convex set invalidates the linear closed-form reduction.
    const double probe = 1e-6;
    for (const State& s : fine_run.trajectory.states) {
        const Vec scaled_udot = (1.0 + probe) * s.udot;
        if (p.space_V->norm_primary(p.K_V.project(scaled_udot) - scaled_udot) >
            probe * probe * std::max(1.0, p.space_V->norm_primary(s.udot))) {
            out.message = "active velocity constraint detected during the reference run";
            return out;
        }
        const Vec shifted = ((s.zeta.array() - 0.5) * (1.0 + probe) + 0.5).matrix();
        if ((p.K_Y.project(shifted) - shifted).cwiseAbs().maxCoeff() > probe * probe) {
            out.message = "active damage constraint detected during the reference run";
            return out;
        }
    }

    out.trajectory.grid = grid;
    for (int n = 0; n <= grid.N; ++n)
        out.trajectory.states.push_back(fine_run.trajectory.states[n * refinement]);
    out.valid = true;
    return out;
}

} // namespace verify
} // namespace dqvi
