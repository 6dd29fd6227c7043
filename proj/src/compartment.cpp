#include "nfde/compartment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "nfde/errors.hpp"

namespace nfde {

namespace {

constexpr double kLagTol = 1e-12;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool same_lag(double a, double b) { return std::abs(a - b) <= kLagTol * std::max(1.0, std::abs(b)); }

// Trapezoid rule for tau -> f(tau) over [-r, 0], at roughly the given step.
template <class F>
double trapezoid_back(double r, double step, F&& f) {
    if (r <= 0.0) return 0.0;
    const auto n = std::max<long>(1, static_cast<long>(std::ceil(r / step - 1e-9)));
    const double h = r / static_cast<double>(n);
    double sum = 0.5 * (f(0.0) + f(-r));
    for (long k = 1; k < n; ++k) sum += f(-static_cast<double>(k) * h);
    return sum * h;
}

}  // namespace

// --- shapes -----------------------------------------------------------------

ShapeFn::ShapeFn(SineBendShape s) : v_(s) {
    if (!(s.eps >= 0.0 && s.eps < 1.0)) throw StructuralError("sine_bend: eps must lie in [0, 1)");
}

double ShapeFn::value(double v) const {
    return std::visit(Overloaded{[v](IdentityShape) { return v; },
                                 [v](SineBendShape s) { return v + s.eps * std::sin(v); },
                                 [v](SaturateShape) { return v / (1.0 + std::abs(v)); }},
                      v_);
}

double ShapeFn::slope(double v) const {
    return std::visit(Overloaded{[](IdentityShape) { return 1.0; },
                                 [v](SineBendShape s) { return 1.0 + s.eps * std::cos(v); },
                                 [v](SaturateShape) {
                                     const double d = 1.0 + std::abs(v);
                                     return 1.0 / (d * d);
                                 }},
                      v_);
}

std::pair<double, double> ShapeFn::slope_bounds() const {
    return std::visit(Overloaded{[](IdentityShape) { return std::pair{1.0, 1.0}; },
                                 [](SineBendShape s) { return std::pair{1.0 - s.eps, 1.0 + s.eps}; },
                                 [](SaturateShape) { return std::pair{0.0, 1.0}; }},
                      v_);
}

std::string ShapeFn::name() const {
    return std::visit(Overloaded{[](IdentityShape) { return std::string("identity"); },
                                 [](SineBendShape s) { return "sine_bend(" + format_double(s.eps) + ")"; },
                                 [](SaturateShape) { return std::string("saturate"); }},
                      v_);
}

double PipeSpec::max_lag() const {
    double r = 0.0;
    for (const auto& [lag, w] : atoms) r = std::max(r, lag);
    return r;
}

void PipeSpec::validate() const {
    if (atoms.empty()) throw StructuralError("pipe: needs at least one atom");
    double total = 0.0;
    for (const auto& [lag, w] : atoms) {
        if (!(lag >= 0.0) || !std::isfinite(lag)) throw StructuralError("pipe: lags must be finite and >= 0");
        if (!(w > 0.0)) throw StructuralError("pipe: weights must be positive");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) throw StructuralError("pipe: weights must sum to 1");
}

// --- systems ----------------------------------------------------------------

bool CompartmentalSystem::closed() const {
    const bool no_out = std::none_of(outflows.begin(), outflows.end(), [](const auto& g) {
        return g.has_value() && !g->gain.is_zero();
    });
    const bool no_in = std::all_of(inflows.begin(), inflows.end(), [](const TrigPoly& p) { return p.is_zero(); });
    return no_out && no_in;
}

double CompartmentalSystem::max_pipe_lag() const {
    double r = 0.0;
    for (std::size_t i = 0; i < pipes.size(); ++i) {
        for (std::size_t j = 0; j < pipes[i].size(); ++j) {
            if (transports[i][j]) r = std::max(r, pipes[i][j].max_lag());
        }
    }
    return r;
}

void CompartmentalSystem::validate() const {
    const auto mm = static_cast<std::size_t>(m);
    if (m < 1) throw StructuralError("system: m must be positive");
    if (dspec.dim() != m) throw DimensionMismatch("system: D operator dimension differs from m");
    if (transports.size() != mm || pipes.size() != mm) throw DimensionMismatch("system: transports/pipes must be m x m");
    for (std::size_t i = 0; i < mm; ++i) {
        if (transports[i].size() != mm || pipes[i].size() != mm) {
            throw DimensionMismatch("system: transports/pipes must be m x m");
        }
        for (const auto& p : pipes[i]) p.validate();
    }
    if (outflows.size() != mm || inflows.size() != mm) throw DimensionMismatch("system: inflows/outflows need m entries");
}

void NeutralDiagSystem::validate() const {
    const auto mm = static_cast<std::size_t>(m);
    if (m < 1) throw StructuralError("system: m must be positive");
    if (c.size() != mm || alpha.size() != mm || rho.size() != mm || transports.size() != mm) {
        throw DimensionMismatch("system: c, alpha, rho, transports need m entries");
    }
    for (std::size_t i = 0; i < mm; ++i) {
        if (!(alpha[i] > 0.0) || !std::isfinite(alpha[i])) throw StructuralError("system: alpha_i must be positive");
        if (rho[i].size() != mm || transports[i].size() != mm) throw DimensionMismatch("system: rho/transports must be m x m");
        for (double r : rho[i]) {
            if (!(r >= 0.0) || !std::isfinite(r)) throw StructuralError("system: rho_ij must be finite and >= 0");
        }
    }
}

CompartmentalSystem NeutralDiagSystem::to_compartmental() const {
    validate();
    const auto mm = static_cast<std::size_t>(m);
    // one atom per distinct lag, diagonal weights
    std::map<double, std::vector<TrigPoly>> by_lag;
    for (std::size_t i = 0; i < mm; ++i) {
        if (c[i].is_zero()) continue;
        auto it = std::find_if(by_lag.begin(), by_lag.end(), [&](const auto& kv) { return same_lag(kv.first, alpha[i]); });
        if (it == by_lag.end()) it = by_lag.emplace(alpha[i], std::vector<TrigPoly>(mm, TrigPoly(0.0))).first;
        it->second[i] = c[i];
    }
    AtomicMeasureFamily nu;
    for (auto& [lag, diag] : by_lag) nu.atoms.push_back(MeasureAtom{lag, TrigMatrix::diagonal(diag)});

    std::vector<std::vector<PipeSpec>> pipes(mm, std::vector<PipeSpec>(mm));
    for (std::size_t i = 0; i < mm; ++i) {
        for (std::size_t j = 0; j < mm; ++j) pipes[i][j] = PipeSpec::delay(rho[i][j]);
    }
    CompartmentalSystem out{m,
                            transports,
                            std::vector<std::optional<TransportSpec>>(mm),
                            std::vector<TrigPoly>(mm, TrigPoly(0.0)),
                            std::move(pipes),
                            DOperatorSpec(flow, TrigMatrix::identity(m), std::move(nu))};
    return out;
}

// --- vector field and mass --------------------------------------------------

namespace {

void require_horizon(const CompartmentalSystem& sys, const HistorySource& hist, const char* who) {
    if (hist.dim() != sys.m) throw DimensionMismatch(std::string(who) + ": history dimension differs from m");
    if (hist.horizon() < sys.max_pipe_lag() - 1e-9) throw HorizonTooShort(std::string(who) + ": history shorter than the pipes");
}

}  // namespace

Vector eval_F(const CompartmentalSystem& sys, const TorusPoint& p, const HistorySource& hist) {
    require_horizon(sys, hist, "eval_F");
    const Eigen::Index m = sys.m;
    const Vector x0 = hist.at(0.0);
    Vector f(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        double v = sys.inflows[ui].eval(p);
        if (sys.outflows[ui]) v -= sys.outflows[ui]->eval(p, x0(i));
        for (std::size_t j = 0; j < static_cast<std::size_t>(m); ++j) {
            // outgoing from i to j
            if (sys.transports[j][ui]) v -= sys.transports[j][ui]->eval(p, x0(i));
            // incoming from j to i through the pipe
            if (sys.transports[ui][j]) {
                for (const auto& [lag, w] : sys.pipes[ui][j].atoms) {
                    const TorusPoint q = sys.flow().advance(p, -lag);
                    v += w * sys.transports[ui][j]->eval(q, hist.at(-lag)(static_cast<Eigen::Index>(j)));
                }
            }
        }
        f(i) = v;
    }
    return f;
}

Vector eval_G(const CompartmentalSystem& sys, const TorusPoint& p, const HistoryGrid& yhat, double tol) {
    return eval_F(sys, p, invert_Dhat(sys.dspec, p, yhat, tol));
}

double total_mass(const CompartmentalSystem& sys, const TorusPoint& p, const HistorySource& hist) {
    require_horizon(sys, hist, "total_mass");
    double mass = eval_D(sys.dspec, p, hist).sum();
    const auto mm = static_cast<std::size_t>(sys.m);
    for (std::size_t i = 0; i < mm; ++i) {
        for (std::size_t j = 0; j < mm; ++j) {
            // material that left i for j and is still in the pipe
            const auto& g = sys.transports[j][i];
            if (!g) continue;
            for (const auto& [lag, w] : sys.pipes[j][i].atoms) {
                mass += w * trapezoid_back(lag, hist.step(), [&](double tau) {
                            return g->eval(sys.flow().advance(p, tau), hist.at(tau)(static_cast<Eigen::Index>(i)));
                        });
            }
        }
    }
    return mass;
}

std::vector<double> mass_balance_residual(const CompartmentalSystem& sys, const MassSeries& log) {
    const std::size_t n = log.times.size();
    if (log.mass.size() != n || log.z.size() != n) throw DimensionMismatch("mass_balance_residual: ragged log");
    std::vector<double> r(n, 0.0);
    if (n == 0) return r;
    auto net = [&](std::size_t k) {
        const TorusPoint q = sys.flow().advance(log.p0, log.times[k]);
        double v = 0.0;
        for (std::size_t i = 0; i < static_cast<std::size_t>(sys.m); ++i) {
            v += sys.inflows[i].eval(q);
            if (sys.outflows[i]) v -= sys.outflows[i]->eval(q, log.z[k](static_cast<Eigen::Index>(i)));
        }
        return v;
    };
    const bool closed = sys.closed();
    double integral = 0.0;
    double prev = closed ? 0.0 : net(0);
    for (std::size_t k = 1; k < n; ++k) {
        if (!closed) {
            const double cur = net(k);
            integral += 0.5 * (prev + cur) * (log.times[k] - log.times[k - 1]);
            prev = cur;
        }
        r[k] = log.mass[k] - log.mass[0] - integral;
    }
    return r;
}

// --- coefficient bounds -----------------------------------------------------

LipschitzBounds lipschitz_bounds(const NeutralDiagSystem& sys, const TorusPoint& p) {
    const Eigen::Index m = sys.m;
    LipschitzBounds out{Matrix::Zero(m, m), Matrix::Zero(m, m), Vector::Zero(m)};
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            const auto& g = sys.transports[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            if (!g) continue;
            const double k = g->gain.eval(p);
            if (k < 0.0) throw StructuralError("lipschitz_bounds: negative gain");
            const auto [lo, hi] = g->shape.slope_bounds();
            out.l_minus(i, j) = k * lo;
            out.l_plus(i, j) = k * hi;
        }
    }
    out.big_l_plus = out.l_plus.colwise().sum().transpose();
    return out;
}

double c_product(const NeutralDiagSystem& sys, const TorusPoint& p, Eigen::Index i, int n) {
    const auto ui = static_cast<std::size_t>(i);
    double prod = 1.0;
    for (int j = 0; j < n; ++j) prod *= sys.c[ui].eval(sys.flow.advance(p, -static_cast<double>(j) * sys.alpha[ui]));
    return prod;
}

PQSequence pq_sequence(const NeutralDiagSystem& sys, const TorusPoint& p, Eigen::Index i, double a, int n_max) {
    const auto ui = static_cast<std::size_t>(i);
    const double alpha = sys.alpha[ui];
    const double rho = sys.rho[ui][ui];
    const TorusPoint p_rho = sys.flow.advance(p, -rho);
    const double big_l = lipschitz_bounds(sys, p).big_l_plus(i);
    const double l_minus = lipschitz_bounds(sys, p_rho).l_minus(i, i);
    const double factor = std::exp(a * (alpha - rho)) * l_minus;
    const double decay = std::exp(a * alpha);

    PQSequence out;
    out.p.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
    out.q.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
    out.scale.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
    out.q[0] = -big_l - a;
    double c_n = 1.0;        // c^[n](p)
    double c_rho_prev = 1.0; // c^[n-1](p . (-rho))
    for (int n = 1; n <= n_max; ++n) {
        c_n *= sys.c[ui].eval(sys.flow.advance(p, -static_cast<double>(n - 1) * alpha));
        if (n >= 2) c_rho_prev *= sys.c[ui].eval(sys.flow.advance(p_rho, -static_cast<double>(n - 2) * alpha));
        const auto un = static_cast<std::size_t>(n);
        out.scale[un] = c_rho_prev;
        out.p[un] = -big_l * c_n + factor * c_rho_prev;
        out.q[un] = out.q[un - 1] * decay + out.p[un];
    }
    return out;
}

// --- conditions -------------------------------------------------------------

std::string to_string(Condition c) {
    switch (c) {
        case Condition::G3: return "G3";
        case Condition::G4: return "G4";
        case Condition::G5: return "G5";
        case Condition::G8: return "G8";
        case Condition::G9: return "G9";
    }
    return "?";
}

Condition condition_from_string(const std::string& s) {
    for (Condition c : {Condition::G3, Condition::G4, Condition::G5, Condition::G8, Condition::G9}) {
        if (to_string(c) == s) return c;
    }
    throw DomainError("unknown condition '" + s + "'");
}

namespace {

struct Row {
    std::string name;
    Eigen::Index component;
    bool strict;         // must be > tol instead of >= -tol
    bool informational;
};

// One sampled point: all values needed by every row.
using RowValues = std::vector<double>;

}  // namespace

ConditionReport check_condition(const NeutralDiagSystem& sys, Condition cond, const std::vector<double>& a,
                                const CheckOptions& opts) {
    sys.validate();
    const Eigen::Index m = sys.m;
    const auto mm = static_cast<std::size_t>(m);
    const bool uses_a = cond != Condition::G5;
    std::vector<double> av = a;
    if (av.empty() && !uses_a) av.assign(mm, 0.0);
    if (av.size() != mm) throw DimensionMismatch("check_condition: a needs one entry per component");
    for (double x : av) {
        if (!(x <= 0.0)) throw DomainError("check_condition: a_i must be <= 0");
    }
    const bool g6 = cond == Condition::G8 || cond == Condition::G9;
    const double tol = opts.strictness_tol;

    ConditionReport rep;
    rep.condition = cond;
    rep.a = av;

    // structural lag relations
    std::vector<bool> active(mm, true);
    for (std::size_t i = 0; i < mm; ++i) {
        const bool c_zero = sys.c[i].is_zero();
        if (cond != Condition::G8) active[i] = !c_zero;
        if (c_zero) continue;
        const double rho = sys.rho[i][i];
        const double alpha = sys.alpha[i];
        const std::string who = to_string(cond) + ", component " + std::to_string(i + 1) + ": ";
        switch (cond) {
            case Condition::G3:
                if (!same_lag(rho, 2.0 * alpha)) throw StructuralError(who + "needs rho_ii = 2 alpha_i");
                break;
            case Condition::G4:
            case Condition::G9:
                if (rho > alpha * (1.0 + kLagTol)) throw StructuralError(who + "needs rho_ii <= alpha_i");
                break;
            case Condition::G5:
                if (!same_lag(rho, alpha)) throw StructuralError(who + "needs rho_ii = alpha_i");
                break;
            case Condition::G8:
                break;
        }
    }
    bool off_diag_lags = false;
    for (std::size_t i = 0; i < mm; ++i) {
        for (std::size_t j = 0; j < mm; ++j) off_diag_lags = off_diag_lags || (i != j && sys.transports[i][j]);
    }
    if (off_diag_lags) rep.notes.push_back("off-diagonal rho_ij are not constrained by this condition and were ignored");

    // rows
    std::vector<Row> rows;
    rows.push_back({"G1.gain", -1, false, false});
    if (g6) {
        rows.push_back({"G6.c_nonneg", -1, false, false});
        rows.push_back({"G6.sum_c_below_1", -1, true, false});
    } else {
        rows.push_back({"G2.c_nonneg", -1, false, false});
        rows.push_back({"G2.c_below_1", -1, true, false});
    }
    std::vector<std::vector<std::size_t>> comp_rows(mm);
    for (std::size_t i = 0; i < mm; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        auto add = [&](std::string name, bool strict, bool info = false) {
            comp_rows[i].push_back(rows.size());
            rows.push_back({std::move(name), ii, strict, info});
        };
        if (!active[i]) {
            // c_i == 0: the component is handled by a_i = -sup L_i^+ - 1
            add("c0.-L-a", true, true);
            continue;
        }
        switch (cond) {
            case Condition::G3: add("G3.1", false); add("G3.2", false); break;
            case Condition::G4: add("G4", false); break;
            case Condition::G5: add("G5", false); break;
            case Condition::G8: add("G8", true); break;
            case Condition::G9: add("G9.1", false); add("G9.2", false); break;
        }
    }

    rep.samples = sample_points(sys.flow, opts.sampling);
    const std::size_t ns = rep.samples.size();
    std::vector<RowValues> values(ns);
    std::vector<std::vector<int>> g4_n0(ns, std::vector<int>(mm, -1));
    std::vector<std::vector<char>> g4_cert(ns, std::vector<char>(mm, 0));

    parallel_for(ns, [&](std::size_t s) {
        const TorusPoint& p = rep.samples[s];
        RowValues v(rows.size(), kNaN);
        const LipschitzBounds lb = lipschitz_bounds(sys, p);
        double min_gain = kInf;
        for (std::size_t i = 0; i < mm; ++i) {
            for (std::size_t j = 0; j < mm; ++j) {
                if (sys.transports[i][j]) min_gain = std::min(min_gain, sys.transports[i][j]->gain.eval(p));
            }
        }
        v[0] = std::isfinite(min_gain) ? min_gain : 0.0;
        double c_min = kInf;
        double c_sum = 0.0;
        double c_max = -kInf;
        for (std::size_t i = 0; i < mm; ++i) {
            const double ci = sys.c[i].eval(p);
            c_min = std::min(c_min, ci);
            c_max = std::max(c_max, ci);
            c_sum += ci;
        }
        v[1] = c_min;
        v[2] = g6 ? 1.0 - c_sum : 1.0 - c_max;

        for (std::size_t i = 0; i < mm; ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            const double ai = av[i];
            const double big_l = lb.big_l_plus(ii);
            const auto& idx = comp_rows[i];
            if (!active[i]) {
                v[idx[0]] = -big_l - ai;
                continue;
            }
            const double ci = sys.c[i].eval(p);
            const double alpha = sys.alpha[i];
            const double rho = sys.rho[i][i];
            const TorusPoint p_rho = sys.flow.advance(p, -rho);
            const double l_minus_rho = lipschitz_bounds(sys, p_rho).l_minus(ii, ii);
            switch (cond) {
                case Condition::G3:
                    v[idx[0]] = (-ai - big_l) * std::exp(ai * alpha) - big_l * ci;
                    v[idx[1]] = l_minus_rho - big_l * c_product(sys, p, ii, 2);
                    break;
                case Condition::G5:
                    v[idx[0]] = l_minus_rho - big_l * ci;
                    break;
                case Condition::G8: {
                    const double gamma = sys.c[i].derivative_along_flow(sys.flow, p);
                    v[idx[0]] = -big_l - ai + neg_part(ai * ci + gamma) * std::exp(-ai * alpha);
                    break;
                }
                case Condition::G9: {
                    const double gamma = sys.c[i].derivative_along_flow(sys.flow, p);
                    v[idx[0]] = -ai - big_l;
                    v[idx[1]] = std::exp(ai * rho) * (-ai - big_l) + l_minus_rho +
                                std::exp(ai * (rho - alpha)) * neg_part(ai * ci + gamma);
                    break;
                }
                case Condition::G4: {
                    const PQSequence pq = pq_sequence(sys, p, ii, ai, opts.n_check);
                    const int N = opts.n_check;
                    // suffix minimum of p over n > n0; p_n is divided by its positive
                    // c-product so that the margin does not fade geometrically with n
                    std::vector<double> suffix(static_cast<std::size_t>(N) + 2, kInf);
                    for (int n = N; n >= 1; --n) {
                        const auto un = static_cast<std::size_t>(n);
                        const double pn = pq.scale[un] > 0.0 ? pq.p[un] / pq.scale[un] : pq.p[un];
                        suffix[un] = std::min(suffix[un + 1], pn);
                    }
                    // p_n for n > N: exact sign certificate when its n-dependence factors out
                    const bool factorable = same_lag(rho, alpha) || sys.c[i].is_constant();
                    double tail = kInf;
                    if (factorable) {
                        tail = l_minus_rho * std::exp(ai * (alpha - rho)) - big_l * ci;
                        g4_cert[s][i] = tail >= -tol ? 1 : 0;
                    }
                    double best = -kInf;
                    int best_n0 = -1;
                    double prefix = kInf;
                    for (int n0 = 0; n0 <= N; ++n0) {
                        const double qn = pq.q[static_cast<std::size_t>(n0)];
                        double mval = std::min({prefix, qn, suffix[static_cast<std::size_t>(n0) + 1]});
                        if (factorable) mval = std::min(mval, tail);
                        const bool ok = qn > tol && prefix >= -tol && suffix[static_cast<std::size_t>(n0) + 1] >= -tol &&
                                        (!factorable || tail >= -tol);
                        if (ok && best_n0 < 0) best_n0 = n0;
                        if (mval > best) best = mval;
                        prefix = std::min(prefix, qn);
                        if (prefix < -tol) break;
                    }
                    g4_n0[s][i] = best_n0;
                    // a found n0 certifies the sample even when the margin value sits at 0
                    v[idx[0]] = best_n0 >= 0 ? std::max(best, 0.0) : std::min(best, -std::abs(best) - tol);
                    break;
                }
            }
        }
        values[s] = std::move(v);
    });

    // fold samples into per-row minima
    for (std::size_t r = 0; r < rows.size(); ++r) {
        SubMargin sm;
        sm.name = rows[r].name;
        sm.component = rows[r].component;
        sm.required_strict = rows[r].strict;
        sm.informational = rows[r].informational;
        sm.min_margin = kInf;
        sm.values.resize(ns);
        for (std::size_t s = 0; s < ns; ++s) {
            const double x = values[s][r];
            sm.values[s] = x;
            if (!std::isnan(x) && x < sm.min_margin) {
                sm.min_margin = x;
                sm.witness = rep.samples[s];
            }
        }
        if (!std::isfinite(sm.min_margin)) sm.min_margin = 0.0;
        sm.passed = sm.required_strict ? sm.min_margin > tol : sm.min_margin >= -tol;
        rep.margins.push_back(std::move(sm));
    }
    // the G4 margin is only a summary; its pass flag comes from the n0 search
    if (cond == Condition::G4) {
        for (std::size_t i = 0; i < mm; ++i) {
            if (!active[i]) continue;
            auto& sm = rep.margins[comp_rows[i][0]];
            sm.passed = std::all_of(g4_n0.begin(), g4_n0.end(), [i](const auto& v) { return v[i] >= 0; });
        }
    }

    bool all = true;
    for (std::size_t r = 0; r < 3; ++r) all = all && rep.margins[r].passed;
    for (std::size_t i = 0; i < mm; ++i) {
        ComponentVerdict cv;
        cv.component = static_cast<Eigen::Index>(i);
        cv.vacuous = !active[i];
        const auto& idx = comp_rows[i];
        cv.worst_margin = kInf;
        for (std::size_t r : idx) cv.worst_margin = std::min(cv.worst_margin, rep.margins[r].min_margin);
        if (cv.vacuous) {
            cv.passed = true;
            cv.strict = true;
            cv.note = "c_i == 0: condition does not constrain this component";
        } else {
            cv.passed = std::all_of(idx.begin(), idx.end(), [&](std::size_t r) { return rep.margins[r].passed; });
            // strictness at every sample: at least one row of this component above tol
            bool strict = true;
            for (std::size_t s = 0; s < ns; ++s) {
                double best = -kInf;
                for (std::size_t r : idx) best = std::max(best, values[s][r]);
                strict = strict && best > tol;
            }
            cv.strict = cond == Condition::G4 ? cv.passed : strict;
            if (idx.size() > 1) cv.passed = cv.passed && strict;
            if (cond == Condition::G4) {
                const bool cert = std::all_of(g4_cert.begin(), g4_cert.end(), [i](const auto& v) { return v[i] != 0; });
                const bool factorable = same_lag(sys.rho[i][i], sys.alpha[i]) || sys.c[i].is_constant();
                cv.note = factorable ? (cert ? "p_n >= 0 certified for all n" : "p_n tail not certified")
                                     : "verified to N_check = " + std::to_string(opts.n_check) + " only";
            }
        }
        all = all && cv.passed;
        rep.components.push_back(std::move(cv));
    }
    rep.passed = all;
    return rep;
}

SuggestResult suggest_a(const NeutralDiagSystem& sys, Condition cond, const std::vector<double>& trial_grid,
                        const CheckOptions& opts) {
    if (trial_grid.empty()) throw DomainError("suggest_a: empty trial grid");
    sys.validate();
    const auto mm = static_cast<std::size_t>(sys.m);

    // the classic choice a_i = -sup L_i^+ - 1, sup over the same samples
    std::vector<double> sup_l(mm, 0.0);
    for (const auto& p : sample_points(sys.flow, opts.sampling)) {
        const Vector l = lipschitz_bounds(sys, p).big_l_plus;
        for (std::size_t i = 0; i < mm; ++i) sup_l[i] = std::max(sup_l[i], l(static_cast<Eigen::Index>(i)));
    }

    SuggestResult out;
    out.a.assign(mm, 0.0);
    out.worst_margin.assign(mm, -kInf);
    out.trials.resize(mm);
    out.surface.resize(mm);

    std::vector<double> trials;
    for (double t : trial_grid) {
        if (t <= 0.0) trials.push_back(t);
    }
    for (std::size_t i = 0; i < mm; ++i) trials.push_back(-sup_l[i] - 1.0);
    std::sort(trials.begin(), trials.end(), std::greater<>());
    trials.erase(std::unique(trials.begin(), trials.end()), trials.end());
    if (trials.empty()) throw DomainError("suggest_a: no trial value <= 0");

    for (double t : trials) {
        const ConditionReport rep = check_condition(sys, cond, std::vector<double>(mm, t), opts);
        for (std::size_t i = 0; i < mm; ++i) {
            const double w = rep.components[i].worst_margin;
            out.trials[i].push_back(t);
            out.surface[i].push_back(w);
            if (rep.components[i].vacuous) continue;
            // trials run from 0 downward, so a strict improvement is needed to move away from 0
            if (w > out.worst_margin[i] + 1e-12) {
                out.worst_margin[i] = w;
                out.a[i] = t;
            }
        }
    }
    for (std::size_t i = 0; i < mm; ++i) {
        if (!sys.c[i].is_zero() || cond == Condition::G8) continue;
        out.a[i] = -sup_l[i] - 1.0;
        const auto it = std::find(out.trials[i].begin(), out.trials[i].end(), out.a[i]);
        out.worst_margin[i] = out.surface[i][static_cast<std::size_t>(it - out.trials[i].begin())];
    }
    return out;
}

}  // namespace nfde
