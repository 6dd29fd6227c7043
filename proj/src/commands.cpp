#include "nfde/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "nfde/errors.hpp"

namespace nfde {

namespace {

std::string fmt(double v) { return format_double(v); }

std::string theta_str(const TorusPoint& p) {
    std::string s;
    for (std::size_t i = 0; i < p.theta.size(); ++i) s += (i ? ";" : "") + fmt(p.theta[i]);
    return s;
}

// Grid long enough for the run, sampled from the configured history.
HistoryGrid initial_grid(const ExperimentConfig& cfg, const HistorySpec& spec) {
    const auto src = spec.build(cfg.sys().m, cfg.sim.h);
    const int n_trunc = resolve_n_trunc(cfg.sys(), cfg.sim);
    const double horizon = required_z_horizon(cfg.sys(), n_trunc);
    if (src->horizon() < horizon - 1e-9) {
        throw HorizonTooShort("initial history covers " + fmt(src->horizon()) + ", the run needs " + fmt(horizon));
    }
    const auto nodes = static_cast<Eigen::Index>(std::ceil(horizon / cfg.sim.h - 1e-9));
    return HistoryGrid::sample(*src, cfg.sim.h, nodes);
}

std::pair<HistoryGrid, HistoryGrid> pair_data(const ExperimentConfig& cfg) {
    const CompartmentalSystem& sys = cfg.sys();
    HistoryGrid zx = initial_grid(cfg, cfg.initial);
    const PairYSpec py = cfg.initial_y.value_or(PairYSpec{});
    HistoryGrid zy = zx;
    if (py.mode == PairYSpec::Mode::Comparison) {
        if (!cfg.sim.cone) throw ConfigError("pair: comparison mode needs a cone");
        const ComparisonFunction cmp = make_comparison_upper(*cfg.sim.cone, sys.m, cfg.sim.h, zx.last_index());
        const HistoryGrid lift = invert_Dhat(sys.dspec, cfg.p0, cmp.y, cfg.sim.inv_tol * 1e-3);
        zy = zx + py.epsilon * lift;
    } else {
        zy = initial_grid(cfg, py.history);
        if (zy.num_nodes() != zx.num_nodes()) throw ConfigError("pair: histories of different length");
    }
    if (py.equalize_mass) {
        const HistoryGrid ones = HistoryGrid::constant(cfg.sim.h, zx.last_index(), Vector::Ones(sys.m));
        const double unit = total_mass(sys, cfg.p0, ones);
        if (std::abs(unit) < 1e-12) throw StructuralError("pair: cannot equalize mass, M(1) vanishes");
        const double kappa = (total_mass(sys, cfg.p0, zy) - total_mass(sys, cfg.p0, zx)) / unit;
        zy = zy - kappa * ones;
    }
    return {std::move(zx), std::move(zy)};
}

double max_abs_dev(const std::vector<double>& xs) {
    double d = 0.0;
    for (double x : xs) d = std::max(d, std::abs(x - xs.front()));
    return d;
}

}  // namespace

bool is_task(const std::string& task) {
    return task == "check" || task == "simulate" || task == "pair" || task == "invert" || task == "mass-audit" ||
           task == "covering";
}

TaskOutput cmd_check(const ExperimentConfig& cfg) {
    TaskOutput out;
    std::ostringstream csv;
    std::ostringstream sum;
    csv << "condition,row,component,min_margin,passed,required_strict,informational,witness_theta\n";

    const StabilityEstimate st = stability_margin(cfg.sys().dspec, cfg.sampling);
    sum << "stability: lambda = " << fmt(st.lambda) << ", k = " << fmt(st.k_bound) << ", samples = "
        << st.sample_count << ", worst theta = " << theta_str(st.worst_point) << "\n";
    csv << "C4,lambda,0," << fmt(1.0 - st.lambda) << ",1,1,0," << theta_str(st.worst_point) << "\n";
    const PositivityReport pos = check_positivity(cfg.sys().dspec, cfg.sampling);
    sum << "positivity: min B^-1 = " << fmt(pos.min_binv) << ", min B^-1 nu = " << fmt(pos.min_binv_nu)
        << (pos.holds() ? " (holds)" : " (fails)") << "\n";

    bool all = true;
    if (!cfg.diag) {
        sum << "conditions: skipped, system is not of the neutral diagonal kind\n";
    } else {
        const NeutralDiagSystem& nd = *cfg.diag;
        for (Condition c : cfg.check.conditions) {
            std::vector<double> a;
            std::string a_note = "given";
            if (c == Condition::G5) {
                a.assign(static_cast<std::size_t>(nd.m), 0.0);
                a_note = "unused";
            } else if (cfg.check.a) {
                a = *cfg.check.a;
            } else {
                a = suggest_a(nd, c, cfg.check.a_grid, cfg.check.options).a;
                a_note = "suggested";
            }
            const ConditionReport rep = check_condition(nd, c, a, cfg.check.options);
            all = all && rep.passed;
            sum << to_string(c) << ": " << (rep.passed ? "PASS" : "FAIL") << "  a (" << a_note << ") =";
            for (double x : rep.a) sum << ' ' << fmt(x);
            sum << "\n";
            for (const auto& sm : rep.margins) {
                const std::string comp = sm.component < 0 ? "all" : std::to_string(sm.component + 1);
                sum << "  " << sm.name << " [" << comp << "] min margin " << fmt(sm.min_margin) << " at theta "
                    << theta_str(sm.witness) << (sm.informational ? " (info)" : sm.passed ? " ok" : " FAIL") << "\n";
                csv << to_string(c) << ',' << sm.name << ',' << (sm.component + 1) << ',' << fmt(sm.min_margin) << ','
                    << sm.passed << ',' << sm.required_strict << ',' << sm.informational << ',' << theta_str(sm.witness)
                    << "\n";
            }
            for (const auto& cv : rep.components) {
                sum << "  component " << cv.component + 1 << ": " << (cv.passed ? "pass" : "fail")
                    << (cv.strict ? ", strict" : ", not strict") << ", worst margin " << fmt(cv.worst_margin);
                if (!cv.note.empty()) sum << " (" << cv.note << ")";
                sum << "\n";
            }
            for (const auto& n : rep.notes) sum << "  note: " << n << "\n";
        }
    }
    sum << "verdict: " << (all ? "all requested conditions pass" : "some condition fails") << "\n";
    out.csv = csv.str();
    out.summary = sum.str();
    out.exit_code = all ? kExitOk : kExitConditionFailed;
    return out;
}

TaskOutput cmd_simulate(const ExperimentConfig& cfg) {
    const HistoryGrid z0 = initial_grid(cfg, cfg.initial);
    const TrajectoryLog log = run(cfg.sys(), cfg.p0, z0, cfg.sim);
    TaskOutput out;
    std::ostringstream csv;
    write_trajectory_csv(csv, log);
    std::ostringstream sum;
    sum << "simulate: t_end = " << fmt(log.times.back()) << ", h = " << fmt(cfg.sim.h) << ", rows = "
        << log.times.size() << "\n";
    sum << "final z =";
    for (Eigen::Index i = 0; i < log.m; ++i) sum << ' ' << fmt(log.z.back()(i));
    sum << "\nmax |M(t) - M(0)| = " << fmt(max_abs_dev(log.mass)) << "\n";
    out.csv = csv.str();
    out.summary = sum.str();
    return out;
}

TaskOutput cmd_mass_audit(const ExperimentConfig& cfg) {
    const HistoryGrid z0 = initial_grid(cfg, cfg.initial);
    const TrajectoryLog log = run(cfg.sys(), cfg.p0, z0, cfg.sim);
    const std::vector<double> r = mass_balance_residual(cfg.sys(), log.mass_series());
    TaskOutput out;
    std::ostringstream csv;
    csv << "t,M,residual\n";
    double worst = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) {
        csv << fmt(log.times[k]) << ',' << fmt(log.mass[k]) << ',' << fmt(r[k]) << "\n";
        worst = std::max(worst, std::abs(r[k]));
    }
    const double limit = cfg.thresholds.mass_residual * std::max(1.0, std::abs(log.mass.front()));
    std::ostringstream sum;
    sum << "mass-audit: " << (cfg.sys().closed() ? "closed" : "open") << " system, M(0) = " << fmt(log.mass.front())
        << "\nmax |residual| = " << fmt(worst) << ", threshold = " << fmt(limit) << "\n"
        << (worst <= limit ? "within threshold" : "THRESHOLD EXCEEDED") << "\n";
    out.csv = csv.str();
    out.summary = sum.str();
    out.exit_code = worst <= limit ? kExitOk : kExitInvariant;
    return out;
}

TaskOutput cmd_pair(const ExperimentConfig& cfg) {
    if (!cfg.sim.cone) throw ConfigError("pair: a cone is required");
    const bool ordered = !cfg.initial_y.value_or(PairYSpec{}).equalize_mass;
    const auto [zx, zy] = pair_data(cfg);
    const PairLog log = run_pair(cfg.sys(), cfg.p0, zx, zy, cfg.sim, ordered);

    TaskOutput out;
    std::ostringstream csv;
    write_pair_csv(csv, log);
    double min_margin = std::numeric_limits<double>::infinity();
    double gap_lo = std::numeric_limits<double>::infinity();
    double gap_hi = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < log.times.size(); ++k) {
        min_margin = std::min(min_margin, log.cone_margin[k]);
        gap_lo = std::min(gap_lo, log.d_gap[k].minCoeff());
        gap_hi = std::max(gap_hi, log.d_gap[k].maxCoeff());
    }
    const double mass_gap = log.mass_y.front() - log.mass_x.front();
    std::ostringstream sum;
    sum << "pair: " << (ordered ? "ordered" : "equal-mass") << " initial data, initial cone margin "
        << fmt(log.initial_order.min_margin) << "\n";
    sum << "min cone margin = " << fmt(min_margin) << "\n";
    sum << "D-gap range = [" << fmt(gap_lo) << ", " << fmt(gap_hi) << "], M(y) - M(x) = " << fmt(mass_gap) << "\n";
    sum << "final |z^y - z^x| = " << fmt(log.diff_now.back()) << ", final D-gap = " << fmt(log.d_gap.back().cwiseAbs().maxCoeff())
        << "\n";
    if (cfg.sim.cone->infinite()) {
        // the infinite-horizon order also wants the initial zhat Lipschitz; only the grid estimate is available
        const HistoryGrid zhat = eval_Dhat_segment(cfg.sys().dspec, cfg.p0, zx);
        double slope = 0.0;
        for (Eigen::Index j = 0; j < zhat.last_index(); ++j) {
            slope = std::max(slope, (zhat.node(j) - zhat.node(j + 1)).cwiseAbs().maxCoeff() / zhat.step());
        }
        sum << "grid Lipschitz estimate of the initial zhat^x = " << fmt(slope)
            << " (continuum Lipschitz continuity is not verified)\n";
    }
    bool ok = true;
    if (ordered && min_margin < -cfg.thresholds.cone_margin) {
        ok = false;
        sum << "CONE MARGIN BELOW -" << fmt(cfg.thresholds.cone_margin) << "\n";
    }
    out.csv = csv.str();
    out.summary = sum.str();
    out.exit_code = ok ? kExitOk : kExitInvariant;
    return out;
}

TaskOutput cmd_invert(const ExperimentConfig& cfg) {
    const auto& spec = cfg.sys().dspec;
    const auto src = cfg.invert.yhat.build(cfg.sys().m, cfg.invert.step);
    const auto nodes = static_cast<Eigen::Index>(std::ceil(cfg.invert.depth / cfg.invert.step - 1e-9));
    const HistoryGrid yhat = HistoryGrid::sample(*src, cfg.invert.step, nodes);
    const StabilityEstimate st = stability_margin(spec, cfg.sampling);
    const InversionResult res = invert_Dhat_detailed(spec, cfg.p0, yhat, cfg.invert.tol, &st);
    const HistoryGrid back = eval_Dhat_segment(spec, cfg.p0, res.x);
    const double roundtrip = sup_norm(back - yhat);

    TaskOutput out;
    std::ostringstream csv;
    csv << 's';
    for (Eigen::Index i = 1; i <= yhat.dim(); ++i) csv << ",x" << i;
    for (Eigen::Index i = 1; i <= yhat.dim(); ++i) csv << ",yhat" << i;
    csv << "\n";
    for (Eigen::Index j = 0; j <= yhat.last_index(); ++j) {
        csv << fmt(-static_cast<double>(j) * yhat.step());
        for (Eigen::Index i = 0; i < yhat.dim(); ++i) csv << ',' << fmt(res.x.samples()(i, j));
        for (Eigen::Index i = 0; i < yhat.dim(); ++i) csv << ',' << fmt(yhat.samples()(i, j));
        csv << "\n";
    }
    std::ostringstream sum;
    sum << "invert: terms = " << res.terms << ", lambda used = " << fmt(res.lambda_used) << ", tail bound = "
        << fmt(res.tail_bound) << "\n";
    sum << "round trip sup |Dhat(x) - yhat| = " << fmt(roundtrip) << "\n";
    sum << "|x| = " << fmt(sup_norm(res.x)) << " <= k |yhat| = " << fmt(st.k_bound * sup_norm(yhat)) << "\n";
    out.csv = csv.str();
    out.summary = sum.str();
    return out;
}

TaskOutput cmd_covering(const ExperimentConfig& cfg) {
    const HistoryGrid z0 = initial_grid(cfg, cfg.initial);
    const TrajectoryLog log = run(cfg.sys(), cfg.p0, z0, cfg.sim);
    TaskOutput out;
    std::ostringstream csv;
    std::ostringstream sum;
    csv << "return_tol,T,distance,e,size\n";
    sum << "covering diagnostic (evidence only, not a proof)\n";
    std::vector<double> tols = cfg.covering.return_tols;
    std::sort(tols.begin(), tols.end(), std::greater<>());
    double prev = std::numeric_limits<double>::infinity();
    bool monotone = true;
    for (double tol : tols) {
        CoveringOptions o = cfg.covering.options;
        o.return_tol = tol;
        const CoveringReport rep = covering_diagnostic(log, cfg.flow, o);
        for (const auto& c : rep.clusters) {
            csv << fmt(tol) << ',' << fmt(c.t_best) << ',' << fmt(c.distance) << ',' << fmt(c.e) << ',' << c.size << "\n";
        }
        sum << "return_tol " << fmt(tol) << ": " << rep.clusters.size() << " returns, e_max = " << fmt(rep.e_max)
            << ", e_last = " << fmt(rep.e_last) << (rep.nonincreasing_tail ? ", tail not increasing" : ", tail increasing")
            << "\n";
        monotone = monotone && rep.e_max < prev;
        prev = rep.e_max;
    }
    sum << (monotone ? "e_max decreases with return_tol" : "e_max does not decrease with return_tol") << "\n";
    out.csv = csv.str();
    out.summary = sum.str();
    return out;
}

int run_task(const std::string& task, const std::filesystem::path& config, const std::filesystem::path& out_dir,
             std::ostream& err) {
    int code = kExitOk;
    std::string message;
    TaskOutput out;
    std::optional<ExperimentConfig> cfg;
    try {
        if (!is_task(task)) throw ConfigError("unknown task '" + task + "'");
        cfg = load_config(config);
        if (task == "check") out = cmd_check(*cfg);
        else if (task == "simulate") out = cmd_simulate(*cfg);
        else if (task == "pair") out = cmd_pair(*cfg);
        else if (task == "invert") out = cmd_invert(*cfg);
        else if (task == "mass-audit") out = cmd_mass_audit(*cfg);
        else out = cmd_covering(*cfg);
        code = out.exit_code;
    } catch (const ConfigError& e) {
        code = kExitConfig;
        message = std::string("config error: ") + e.what();
    } catch (const DivergenceError& e) {
        code = kExitDivergence;
        message = std::string("divergence: ") + e.what();
    } catch (const UnstableMargin& e) {
        code = kExitStructural;
        message = std::string("UnstableMargin: ") + e.what() + " (lambda = " + fmt(e.lambda()) + ")";
    } catch (const StructuralError& e) {
        code = kExitStructural;
        message = std::string("structural error: ") + e.what();
    } catch (const Error& e) {
        code = kExitConfig;
        message = std::string("error: ") + e.what();
    }

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        err << "cannot create output directory " << out_dir << ": " << ec.message() << "\n";
        return code == kExitOk ? kExitConfig : code;
    }
    if (cfg) std::ofstream(out_dir / "config.echo.json") << cfg->echo.dump(2) << "\n";
    if (message.empty()) {
        std::ofstream(out_dir / "result.csv") << out.csv;
        std::ofstream(out_dir / "summary.txt") << out.summary << "exit code: " << code << "\n";
    } else {
        err << message << "\n";
        std::filesystem::remove(out_dir / "result.csv", ec);  // never leave a stale result behind
        std::ofstream(out_dir / "summary.txt") << message << "\nexit code: " << code << "\n";
    }
    return code;
}

}  // namespace nfde
