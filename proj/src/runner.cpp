#include "dqvi/runner.hpp"

#include "dqvi/builtin.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace dqvi {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

ProblemHandle build_problem(const RunConfig& cfg, bool allow_margin_violation) {
    ProblemHandle h;
    if (cfg.is_contact) {
        h.contact = contact2d::compile(*cfg.contact, cfg.grid.T, allow_margin_violation);
        h.problem = h.contact->problem;
    } else {
        h.problem = make_builtin_problem(cfg.source);
        h.problem.constants.T = cfg.grid.T;
    }
    return h;
}

namespace {

namespace fs = std::filesystem;

void write_trajectory_csv(const std::string& path, const ProblemHandle& h,
                          const Trajectory& traj) {
    std::ofstream out(path);
    out << "step,t,node,u0,u1,ud0,ud1,w,zeta\n";
    if (h.contact) {
        const auto& a = *h.contact->assembly;
        std::vector<int> contact_slot(a.node_to_free.size(), -1);
        for (int i = 0; i < a.contact_count(); ++i) contact_slot[a.gamma3_nodes[i]] = i;
        for (std::size_t n = 0; n < traj.states.size(); ++n) {
            const State& s = traj.states[n];
            for (std::size_t node = 0; node < a.node_to_free.size(); ++node) {
                const int f = a.node_to_free[node];
                const double ux = f >= 0 ? s.u[2 * f] : 0.0;
                const double uy = f >= 0 ? s.u[2 * f + 1] : 0.0;
                const double vx = f >= 0 ? s.udot[2 * f] : 0.0;
                const double vy = f >= 0 ? s.udot[2 * f + 1] : 0.0;
                out << n << ',' << fmt17(s.t) << ',' << node << ',' << fmt17(ux) << ','
                    << fmt17(uy) << ',' << fmt17(vx) << ',' << fmt17(vy) << ',';
                if (contact_slot[node] >= 0) out << fmt17(s.w[contact_slot[node]]);
                out << ',' << fmt17(s.zeta[static_cast<int>(node)]) << '\n';
            }
        }
    } else {
        const int dim_v = h.problem.space_V->dim();
        const int dim_w = h.problem.space_W->dim();
        const int dim_y = h.problem.space_Y->dim();
        const int rows = std::max({dim_v, dim_w, dim_y});
        for (std::size_t n = 0; n < traj.states.size(); ++n) {
            const State& s = traj.states[n];
            for (int i = 0; i < rows; ++i) {
                out << n << ',' << fmt17(s.t) << ',' << i << ',';
                if (i < dim_v) out << fmt17(s.u[i]);
                out << ",,"; // u1 unused for coefficient rows
                if (i < dim_v) out << fmt17(s.udot[i]);
                out << ",,";
                if (i < dim_w) out << fmt17(s.w[i]);
                out << ',';
                if (i < dim_y) out << fmt17(s.zeta[i]);
                out << '\n';
            }
        }
    }
}

void write_diagnostics_csv(const std::string& path, const Trajectory& traj) {
    std::ofstream out(path);
    out << "step,sweeps,change_first,change_last,ratio_max,ratio_last,velocity_iterations\n";
    for (const StepDiagnostics& d : traj.diagnostics) {
        out << d.step << ',' << d.sweeps << ',';
        if (!d.sweep_changes.empty())
            out << fmt17(d.sweep_changes.front()) << ',' << fmt17(d.sweep_changes.back());
        else
            out << ',';
        out << ',';
        if (!d.ratios.empty()) {
            double mx = d.ratios.front();
            for (double r : d.ratios) mx = std::max(mx, r);
            out << fmt17(mx) << ',' << fmt17(d.ratios.back());
        } else {
            out << ',';
        }
        out << ',' << d.velocity_iterations << '\n';
    }
}

} // namespace

RunArtifacts cmd_run(const RunConfig& cfg, const std::string& out_dir) {
    RunArtifacts art;
    fs::create_directories(out_dir);
    art.trajectory_path = (fs::path(out_dir) / "trajectory.csv").string();
    art.diagnostics_path = (fs::path(out_dir) / "diagnostics.csv").string();
    art.summary_path = (fs::path(out_dir) / "summary.txt").string();

    const auto t0 = std::chrono::steady_clock::now();
    ProblemHandle h;
    std::string refusal;
    try {
        h = build_problem(cfg, cfg.stepper.override_margin);
    } catch (const InfeasibleError& e) {
        refusal = e.what();
    }

    std::ofstream summary(art.summary_path);
    auto key = [&summary](const std::string& k, const std::string& v) {
        summary << k << " = " << v << "\n";
    };

    if (!refusal.empty()) {
        art.exit_code = 2;
        art.message = "refused before stepping: smallness margin violated (m_C <= alpha_1)";
        key("status", "margin_refused");
        key("reason", art.message);
        key("detail", refusal);
        return art;
    }

    art.result = run(h.problem, cfg.grid, cfg.stepper);
    if (!art.result.ok && art.result.failed_step == 0) {
        // run() itself refused on the margin (abstract problems).
        art.exit_code = 2;
        art.message = "refused before stepping: smallness margin violated (m_C <= alpha_1)";
        key("status", "margin_refused");
        key("reason", art.message);
        return art;
    }

    write_trajectory_csv(art.trajectory_path, h, art.result.trajectory);
    write_diagnostics_csv(art.diagnostics_path, art.result.trajectory);

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    key("status", art.result.ok ? "ok" : "step_failed");
    key("failed_step", std::to_string(art.result.failed_step));
    if (!art.result.ok) key("reason", art.result.failure);
    key("grid.T", fmt17(cfg.grid.T));
    key("grid.N", std::to_string(cfg.grid.N));
    key("grid.dt", fmt17(cfg.grid.dt()));
    key("seed", std::to_string(cfg.seed));
    const ProblemConstants& c = h.problem.constants;
    key("margin_m_alpha", fmt17(c.m_C - c.alpha1));
    if (c.m_C > c.alpha1) {
        const ContractionConstants cc = contraction_constants(c);
        key("c_p", fmt17(cc.c_p));
        key("c_q", fmt17(cc.c_q));
        key("c_r", fmt17(cc.c_r));
    }
    if (h.contact) {
        key("contact.viscosity_margin", fmt17(h.contact->theorem_margin));
        key("contact.trace_norm", fmt17(h.contact->assembly->trace_norm));
        if (h.contact->margin_warning) key("contact.warning", h.contact->warning);
    }
    key("wall_time_s", fmt17(wall));
    if (!art.result.ok) {
        art.exit_code = 3;
        art.message = art.result.failure;
    }
    return art;
}

ConvergenceArtifacts cmd_convergence(const RunConfig& cfg, const std::string& out_dir,
                                     int levels) {
    require(levels >= 3, "convergence study needs at least 3 levels");
    ConvergenceArtifacts art;
    fs::create_directories(out_dir);
    art.table_path = (fs::path(out_dir) / "convergence.csv").string();

    ProblemHandle h = build_problem(cfg, cfg.stepper.override_margin);
    std::vector<Trajectory> runs;
    for (int level = 0; level < levels; ++level) {
        const TimeGrid grid(cfg.grid.T, cfg.grid.N << level);
        RunResult r = run(h.problem, grid, cfg.stepper);
        if (!r.ok) {
            art.exit_code = 3;
            art.message = "level " + std::to_string(level) + " failed at step " +
                          std::to_string(r.failed_step) + ": " + r.failure;
            break;
        }
        runs.push_back(std::move(r.trajectory));
    }

    // Sup-norm over the base-grid nodes of the displacement difference.
    std::vector<double> diffs;
    for (std::size_t k = 0; k + 1 < runs.size(); ++k) {
        double sup = 0.0;
        for (int n = 0; n <= cfg.grid.N; ++n) {
            const Vec& coarse = runs[k].states[n << k].u;
            const Vec& fine = runs[k + 1].states[n << (k + 1)].u;
            sup = std::max(sup, h.problem.space_V->norm_primary(coarse - fine));
        }
        diffs.push_back(sup);
    }
    for (std::size_t k = 0; k < runs.size(); ++k) {
        ConvergenceRow row;
        row.level = static_cast<int>(k);
        row.steps = cfg.grid.N << k;
        if (k < diffs.size()) {
            row.diff = diffs[k];
            row.has_diff = true;
        }
        if (k + 1 < diffs.size()) {
            if (diffs[k] == 0.0 && diffs[k + 1] == 0.0)
                row.exact = true;
            else if (diffs[k + 1] > 0.0) {
                row.order = std::log2(diffs[k] / diffs[k + 1]);
                row.has_order = true;
            }
        }
        art.rows.push_back(row);
    }

    std::ofstream out(art.table_path);
    out << "level,N,diff,order\n";
    for (const ConvergenceRow& r : art.rows) {
        out << r.level << ',' << r.steps << ',';
        if (r.has_diff) out << fmt17(r.diff);
        out << ',';
        if (r.exact)
            out << "exact";
        else if (r.has_order)
            out << fmt17(r.order);
        out << '\n';
    }
    return art;
}

ValidateArtifacts cmd_validate(const RunConfig& cfg, int samples) {
    ValidateArtifacts art;
    // Build with the margin gate open so infeasible declarations are reported
    // rather than thrown.
    ProblemHandle h = build_problem(cfg, true);
    art.report = validate_hypotheses(h.problem, samples, cfg.seed);

    std::ostringstream os;
    os << art.report.summary();
    bool margins_ok = art.report.margin_m_alpha > 0.0;
    if (h.contact) {
        os << "contact viscosity margin = " << fmt17(h.contact->theorem_margin) << "\n";
        if (h.contact->margin_warning) os << "warning: " << h.contact->warning << "\n";
        margins_ok = margins_ok && h.contact->theorem_margin > 0.0;
    }
    art.text = os.str();
    art.exit_code = (art.report.all_pass && margins_ok) ? 0 : 1;
    return art;
}

} // namespace dqvi
