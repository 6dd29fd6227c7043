#include "nfde/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "nfde/errors.hpp"

namespace nfde {

namespace {

constexpr double kSnap = 1e-9;  // relative to h

bool is_identity(const TrigMatrix& b) {
    for (Eigen::Index i = 0; i < b.rows(); ++i) {
        for (Eigen::Index j = 0; j < b.cols(); ++j) {
            const TrigPoly& e = b(i, j);
            if (!e.is_constant() || e.constant() != (i == j ? 1.0 : 0.0)) return false;
        }
    }
    return true;
}

// One-sided second-order difference at s = 0, centered elsewhere.
Vector fd_slope(const HistorySource& src, double s) {
    const double d = 1e-5;
    if (s > -2.0 * d) return (3.0 * src.at(s) - 4.0 * src.at(s - d) + src.at(s - 2.0 * d)) / (2.0 * d);
    return (src.at(s + d) - src.at(s - d)) / (2.0 * d);
}

// F at a stage: z(tau) is the stage value, the past comes from the buffer.
class StageView final : public HistorySource {
  public:
    StageView(const SimState& state, double tau, const Vector& z) : state_(&state), tau_(tau), z_(&z) {}
    Eigen::Index dim() const override { return z_->size(); }
    Vector at(double s) const override {
        if (s > -kSnap * state_->h()) return *z_;
        return state_->z_at(tau_ + s);
    }
    double horizon() const override { return tau_ - state_->z_start(); }
    double step() const override { return state_->h(); }

  private:
    const SimState* state_;
    double tau_;
    const Vector* z_;
};

}  // namespace

void SimConfig::validate() const {
    if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("sim: h must be positive");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw DomainError("sim: t_end must be positive");
    if (!(inv_tol > 0.0)) throw DomainError("sim: inv_tol must be positive");
    if (n_trunc < 0) throw DomainError("sim: n_trunc must be >= 0");
    if (log_stride < 1) throw DomainError("sim: log_stride must be >= 1");
    if (cone) cone->validate();
}

double required_z_horizon(const CompartmentalSystem& sys, int n_trunc) {
    const double atoms = sys.dspec.nu().support();
    return static_cast<double>(n_trunc) * atoms + sys.max_pipe_lag() + atoms;
}

int resolve_n_trunc(const CompartmentalSystem& sys, const SimConfig& cfg, double* lambda_out) {
    const StabilityEstimate est = stability_margin(sys.dspec, OmegaSampling{});
    if (lambda_out) *lambda_out = est.lambda;
    if (cfg.n_trunc > 0) return cfg.n_trunc;
    if (est.lambda <= 0.0) return 1;
    return std::max(1, static_cast<int>(std::ceil(std::log(cfg.inv_tol) / std::log(est.lambda))));
}

SimState::SimState(const CompartmentalSystem& sys, const TorusPoint& p0, const HistorySource& z_hist,
                   const SimConfig& cfg)
    : sys_(sys), p0_(p0), cfg_(cfg) {
    cfg_.validate();
    sys_.validate();
    const double h = cfg_.h;
    if (z_hist.dim() != sys_.m) throw DimensionMismatch("init_from_z: history dimension differs from m");
    if (sys_.dspec.nu().density) throw StructuralError("integrator: measure densities are not supported");
    for (const auto& a : sys_.dspec.nu().atoms) {
        if (a.lag < h * (1.0 - kSnap)) throw StructuralError("integrator: atom lags must be at least h");
    }
    for (std::size_t i = 0; i < sys_.pipes.size(); ++i) {
        for (std::size_t j = 0; j < sys_.pipes[i].size(); ++j) {
            if (!sys_.transports[i][j]) continue;
            for (const auto& [lag, w] : sys_.pipes[i][j].atoms) {
                if (lag > 0.0 && lag < h * (1.0 - kSnap)) {
                    throw StructuralError("integrator: pipe lags must be 0 or at least h");
                }
            }
        }
    }
    b_identity_ = is_identity(sys_.dspec.b());
    n_trunc_ = resolve_n_trunc(sys_, cfg_, &lambda_);

    const double horizon = required_z_horizon(sys_, n_trunc_);
    if (z_hist.horizon() < horizon - kSnap) {
        throw HorizonTooShort("init_from_z: initial history covers " + format_double(z_hist.horizon()) +
                              " but " + format_double(horizon) + " is needed");
    }
    first_ = static_cast<long>(std::ceil(horizon / h - kSnap));
    const double support = sys_.dspec.nu().support();
    const long hat_offset = static_cast<long>(std::ceil(support / h - kSnap));
    zhat_start_ = -static_cast<double>(first_ - hat_offset) * h;

    nodes_.resize(static_cast<std::size_t>(first_) + 1);
    for (long k = 0; k <= first_; ++k) {
        const double s = -static_cast<double>(first_ - k) * h;
        auto& n = nodes_[static_cast<std::size_t>(k)];
        n.z = z_hist.at(s);
        n.z_left = fd_slope(z_hist, s);
        n.z_right = n.z_left;
        check_finite(n.z, s);
    }
    const Eigen::Index m = sys_.m;
    const Vector nan = Vector::Constant(m, std::numeric_limits<double>::quiet_NaN());
    for (long k = 0; k <= first_; ++k) {
        auto& n = nodes_[static_cast<std::size_t>(k)];
        const double s = -static_cast<double>(first_ - k) * h;
        if (k < hat_offset) {
            n.zhat = n.zhat_left = n.zhat_right = nan;
            continue;
        }
        const TorusPoint p = base_at(s);
        n.zhat = eval_D(sys_.dspec, p, View(*this, s));
        n.zhat_left = zhat_slope_from_z(s, p, n.z, n.z_left, true);
        n.zhat_right = n.zhat_left;
    }
    // the right side of t = 0 follows the equation
    auto& n0 = nodes_.back();
    n0.zhat_right = eval_F(sys_, p0_, View(*this, 0.0));
    n0.z_right = z_slope(0.0, p0_, n0.z, n0.zhat_right, false);
}

SimState init_from_z(const CompartmentalSystem& sys, const TorusPoint& p0, const HistorySource& z_hist,
                     const SimConfig& cfg) {
    return SimState(sys, p0, z_hist, cfg);
}

void SimState::check_finite(const Vector& v, double when) const {
    if (!v.allFinite() || v.cwiseAbs().maxCoeff() > kDivergenceBound) {
        throw DivergenceError("integrator: solution left the bound " + format_double(kDivergenceBound) + " at t = " +
                                  format_double(when),
                              when);
    }
}

long SimState::index_of(double t) const {
    return first_ + std::lround(t / cfg_.h);
}

const TrajectoryNode& SimState::node_at(double t) const {
    const long k = index_of(t);
    if (k < 0 || k >= static_cast<long>(nodes_.size())) throw DomainError("trajectory: time outside the buffer");
    return nodes_[static_cast<std::size_t>(k)];
}

Vector SimState::dense(double t, bool hat) const {
    const double x = t / cfg_.h + static_cast<double>(first_);
    const long last = static_cast<long>(nodes_.size()) - 1;
    if (x > static_cast<double>(last) + kSnap) throw DomainError("trajectory: time ahead of the solution");
    long k0 = static_cast<long>(std::floor(x + kSnap));
    if (k0 < 0) k0 = 0;  // constant extension before the stored data
    const double u = x - static_cast<double>(k0);
    const auto& a = nodes_[static_cast<std::size_t>(k0)];
    if (u < kSnap || k0 == last) return hat ? a.zhat : a.z;
    const auto& b = nodes_[static_cast<std::size_t>(k0) + 1];
    const Vector& y0 = hat ? a.zhat : a.z;
    const Vector& d0 = hat ? a.zhat_right : a.z_right;
    const Vector& y1 = hat ? b.zhat : b.z;
    const Vector& d1 = hat ? b.zhat_left : b.z_left;
    Vector out(y0.size());
    for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = hermite_cubic(y0(i), d0(i), y1(i), d1(i), cfg_.h, u);
    return out;
}

Vector SimState::dense_slope(double t, bool left) const {
    const double x = t / cfg_.h + static_cast<double>(first_);
    const long last = static_cast<long>(nodes_.size()) - 1;
    const long k = std::lround(x);
    if (std::abs(x - static_cast<double>(k)) < kSnap && k >= 0 && k <= last) {
        const auto& n = nodes_[static_cast<std::size_t>(k)];
        return left ? n.z_left : n.z_right;
    }
    long k0 = static_cast<long>(std::floor(x));
    if (k0 < 0) return nodes_.front().z_left;
    if (k0 >= last) throw DomainError("trajectory: time ahead of the solution");
    const double u = x - static_cast<double>(k0);
    const auto& a = nodes_[static_cast<std::size_t>(k0)];
    const auto& b = nodes_[static_cast<std::size_t>(k0) + 1];
    Vector out(a.z.size());
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        out(i) = hermite_cubic_slope(a.z(i), a.z_right(i), b.z(i), b.z_left(i), cfg_.h, u);
    }
    return out;
}

Vector SimState::z_at(double t) const { return dense(t, false); }
Vector SimState::zhat_at(double t) const {
    if (t < zhat_start_ - kSnap * cfg_.h) throw DomainError("trajectory: zhat is not stored that far back");
    return dense(t, true);
}

Vector SimState::View::at(double s) const {
    if (s > kSnap * state_->h()) throw DomainError("history: s must be <= 0");
    return state_->z_at(t_ + std::min(s, 0.0));
}

HistoryGrid SimState::z_segment(double t, Eigen::Index depth) const {
    Matrix samples(sys_.m, depth + 1);
    for (Eigen::Index j = 0; j <= depth; ++j) samples.col(j) = z_at(t - static_cast<double>(j) * cfg_.h);
    return HistoryGrid(cfg_.h, std::move(samples), TailPolicy::ConstantExtension, t);
}

HistoryGrid SimState::zhat_segment(double t, Eigen::Index depth) const {
    Matrix samples(sys_.m, depth + 1);
    for (Eigen::Index j = 0; j <= depth; ++j) samples.col(j) = zhat_at(t - static_cast<double>(j) * cfg_.h);
    return HistoryGrid(cfg_.h, std::move(samples), TailPolicy::ConstantExtension, t);
}

// z(tau) = B^-1 [zhat + sum_k W_k z(tau - s_k)]
Vector SimState::reconstruct_point(double tau, const TorusPoint& p, const Vector& zhat) const {
    Vector rhs = zhat;
    for (const auto& a : sys_.dspec.nu().atoms) rhs += a.weight.eval(p) * z_at(tau - a.lag);
    if (b_identity_) return rhs;
    return sys_.dspec.b().eval(p).fullPivLu().solve(rhs);
}

// z' = B^-1 [zhat' + sum_k (W_k' z(tau - s_k) + W_k z'(tau - s_k)) - B' z]
Vector SimState::z_slope(double tau, const TorusPoint& p, const Vector& z, const Vector& zhat_slope,
                         bool left) const {
    Vector rhs = zhat_slope;
    const TorusFlow& flow = sys_.flow();
    for (const auto& a : sys_.dspec.nu().atoms) {
        rhs += a.weight.derivative_along_flow(flow, p) * z_at(tau - a.lag) +
               a.weight.eval(p) * dense_slope(tau - a.lag, left);
    }
    if (b_identity_) return rhs;
    rhs -= sys_.dspec.b().derivative_along_flow(flow, p) * z;
    return sys_.dspec.b().eval(p).fullPivLu().solve(rhs);
}

// zhat' = B' z + B z' - sum_k (W_k' z(tau - s_k) + W_k z'(tau - s_k))
Vector SimState::zhat_slope_from_z(double tau, const TorusPoint& p, const Vector& z, const Vector& z_slope,
                                   bool left) const {
    const TorusFlow& flow = sys_.flow();
    Vector out = b_identity_ ? z_slope
                             : Vector(sys_.dspec.b().derivative_along_flow(flow, p) * z +
                                      sys_.dspec.b().eval(p) * z_slope);
    for (const auto& a : sys_.dspec.nu().atoms) {
        out -= a.weight.derivative_along_flow(flow, p) * z_at(tau - a.lag) +
               a.weight.eval(p) * dense_slope(tau - a.lag, left);
    }
    return out;
}

void SimState::step() {
    const double h = cfg_.h;
    const double t0 = t();
    const double half = 0.5 * h;
    const Vector y0 = nodes_.back().zhat;
    const Vector k1 = nodes_.back().zhat_right;

    auto stage = [&](double tau, const Vector& y) {
        const TorusPoint p = base_at(tau);
        const Vector z = reconstruct_point(tau, p, y);
        return eval_F(sys_, p, StageView(*this, tau, z));
    };
    const Vector k2 = stage(t0 + half, y0 + half * k1);
    const Vector k3 = stage(t0 + half, y0 + half * k2);
    const Vector k4 = stage(t0 + h, y0 + h * k3);
    const Vector y1 = y0 + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double t1 = static_cast<double>(steps_ + 1) * h;
    check_finite(y1, t1);

    const TorusPoint p1 = base_at(t1);
    TrajectoryNode n;
    n.zhat = y1;
    n.z = reconstruct_point(t1, p1, y1);
    check_finite(n.z, t1);
    nodes_.push_back(n);
    ++steps_;
    auto& back = nodes_.back();
    back.zhat_left = eval_F(sys_, p1, View(*this, t1));
    back.zhat_right = back.zhat_left;
    back.z_left = z_slope(t1, p1, back.z, back.zhat_left, true);
    back.z_right = z_slope(t1, p1, back.z, back.zhat_left, false);
}

// --- reconstruction from zhat ----------------------------------------------

Vector reconstruct_z(const SimState& state, double s) {
    const auto& spec = state.system().dspec;
    if (!spec.is_scalar_diagonal()) return reconstruct_z_general(state, s);
    const double tau = state.t() + s;
    const Eigen::Index m = state.system().m;
    const TorusFlow& flow = spec.flow();
    Vector out = state.zhat_at(tau);
    for (const auto& atom : spec.nu().atoms) {
        const double alpha = atom.lag;
        if (tau - static_cast<double>(state.n_trunc()) * alpha < state.zhat_start() - 1e-9 * state.h()) {
            throw HorizonTooShort("reconstruct_z: not enough zhat history behind s");
        }
        for (Eigen::Index i = 0; i < m; ++i) {
            const TrigPoly& c = atom.weight(i, i);
            if (c.is_zero()) continue;
            double prod = 1.0;
            for (int n = 1; n <= state.n_trunc(); ++n) {
                prod *= c.eval(flow.advance(state.p0(), tau - static_cast<double>(n - 1) * alpha));
                out(i) += prod * state.zhat_at(tau - static_cast<double>(n) * alpha)(i);
            }
        }
    }
    return out;
}

Vector reconstruct_z_general(const SimState& state, double s) {
    const double tau = state.t() + s;
    const double avail = tau - state.zhat_start();
    if (avail < -1e-9 * state.h()) throw HorizonTooShort("reconstruct_z: s is before the stored zhat");
    const auto depth = static_cast<Eigen::Index>(std::floor(avail / state.h() + 1e-9));
    const HistoryGrid seg = state.zhat_segment(tau, depth);
    return invert_Dhat(state.system().dspec, state.base_at(tau), seg, state.config().inv_tol).node(0);
}

double reconstruct_tail_bound(const SimState& state) {
    const double lam = state.lambda();
    if (lam <= 0.0) return 0.0;
    double sup = 0.0;
    const double h = state.h();
    for (double t = state.t(); t >= state.zhat_start() - 1e-9 * h; t -= h) {
        sup = std::max(sup, state.zhat_at(t).cwiseAbs().maxCoeff());
    }
    return std::pow(lam, state.n_trunc() + 1) * sup / (1.0 - lam);
}

// --- runs -------------------------------------------------------------------

namespace {

double mass_now(const SimState& s) {
    return total_mass(s.system(), s.base_at(s.t()), SimState::View(s, s.t()));
}

long total_steps(const SimConfig& cfg) { return std::lround(std::ceil(cfg.t_end / cfg.h - 1e-9)); }

}  // namespace

TrajectoryLog run(const CompartmentalSystem& sys, const TorusPoint& p0, const HistorySource& z_hist,
                  const SimConfig& cfg) {
    SimState state(sys, p0, z_hist, cfg);
    TrajectoryLog log;
    log.p0 = p0;
    log.m = sys.m;
    auto record = [&] {
        log.times.push_back(state.t());
        log.z.push_back(state.current().z);
        log.zhat.push_back(state.current().zhat);
        log.mass.push_back(mass_now(state));
    };
    record();
    const long n = total_steps(cfg);
    for (long k = 1; k <= n; ++k) {
        state.step();
        if (k % cfg.log_stride == 0 || k == n) record();
    }
    return log;
}

namespace {

class ConeTracker {
  public:
    ConeTracker(const ConeSpec& cone, double h, double tol) : cone_(cone), h_(h), tol_(tol) {
        if (cone_.infinite()) e_ = matrix_exp(cone_.a, h);
    }

    OrderReport initial(const SimState& x, const SimState& y) {
        const Eigen::Index depth = window_depth(x);
        OrderReport rep = cone_membership_of_difference(diff(x, y, depth), cone_, tol_);
        running_ = rep.min_margin;
        prev_ = y.current().zhat - x.current().zhat;
        return rep;
    }

    double update(const SimState& x, const SimState& y) {
        if (!cone_.infinite()) {
            return cone_membership_of_difference(diff(x, y, window_depth(x)), cone_, tol_).min_margin;
        }
        // consecutive pairs chain, so the running minimum covers every pair seen so far
        const Vector v = y.current().zhat - x.current().zhat;
        running_ = std::min({running_, v.minCoeff(), (v - e_ * prev_).minCoeff()});
        prev_ = v;
        return running_;
    }

  private:
    Eigen::Index window_depth(const SimState& s) const {
        const auto avail = static_cast<Eigen::Index>(std::floor((s.t() - s.zhat_start()) / h_ + 1e-9));
        if (cone_.infinite()) return avail;
        const auto need = static_cast<Eigen::Index>(std::ceil(*cone_.horizon / h_ - 1e-9));
        if (need > avail) throw HorizonTooShort("pair: stored zhat is shorter than the cone horizon");
        return need;
    }
    static HistoryGrid diff(const SimState& x, const SimState& y, Eigen::Index depth) {
        return y.zhat_segment(y.t(), depth) - x.zhat_segment(x.t(), depth);
    }

    ConeSpec cone_;
    double h_;
    double tol_;
    Matrix e_;
    Vector prev_;
    double running_ = 0.0;
};

}  // namespace

PairLog run_pair(const CompartmentalSystem& sys, const TorusPoint& p0, const HistorySource& z_x,
                 const HistorySource& z_y, const SimConfig& cfg, bool require_ordered) {
    SimState sx(sys, p0, z_x, cfg);
    SimState sy(sys, p0, z_y, cfg);
    PairLog log;
    log.p0 = p0;
    log.m = sys.m;

    std::optional<ConeTracker> tracker;
    if (cfg.cone) {
        tracker.emplace(*cfg.cone, cfg.h, cfg.tol_cone);
        log.initial_order = tracker->initial(sx, sy);
        if (require_ordered && !log.initial_order.ordered) {
            throw UnorderedInitialData("pair: initial data are not ordered; worst slack " +
                                       format_double(log.initial_order.min_margin) + " at t = " +
                                       format_double(log.initial_order.witness_t) + ", s = " +
                                       format_double(log.initial_order.witness_s) + ", component " +
                                       std::to_string(log.initial_order.witness_component + 1));
        }
    } else if (require_ordered) {
        throw StructuralError("pair: an ordered pair run needs a cone");
    }

    const double window = sys.dspec.nu().support() + sys.max_pipe_lag();
    const double h = cfg.h;
    auto record = [&](double margin) {
        const double t = sx.t();
        log.times.push_back(t);
        log.zx.push_back(sx.current().z);
        log.zy.push_back(sy.current().z);
        log.zhatx.push_back(sx.current().zhat);
        log.zhaty.push_back(sy.current().zhat);
        log.cone_margin.push_back(margin);
        log.d_gap.push_back(sy.current().zhat - sx.current().zhat);
        log.mass_x.push_back(mass_now(sx));
        log.mass_y.push_back(mass_now(sy));
        log.diff_now.push_back((sy.current().z - sx.current().z).cwiseAbs().maxCoeff());
        double w = 0.0;
        for (double s = 0.0; s <= window + 1e-9 * h; s += h) {
            w = std::max(w, (sy.z_at(t - s) - sx.z_at(t - s)).cwiseAbs().maxCoeff());
        }
        log.diff_window.push_back(w);
    };
    const double nan = std::numeric_limits<double>::quiet_NaN();
    record(tracker ? log.initial_order.min_margin : nan);
    const long n = total_steps(cfg);
    for (long k = 1; k <= n; ++k) {
        sx.step();
        sy.step();
        const double margin = tracker ? tracker->update(sx, sy) : nan;
        if (k % cfg.log_stride == 0 || k == n) record(margin);
    }
    return log;
}

PairLog run_ordered_pair(const CompartmentalSystem& sys, const TorusPoint& p0, const HistorySource& z_x,
                         const HistorySource& z_y, const SimConfig& cfg) {
    return run_pair(sys, p0, z_x, z_y, cfg, true);
}

// --- covering ---------------------------------------------------------------

CoveringReport covering_diagnostic(const TrajectoryLog& log, const TorusFlow& flow, const CoveringOptions& opts) {
    const std::size_t n = log.times.size();
    if (n < 3) throw NoReturnTimes("covering: log too short");
    if (!(opts.return_tol > 0.0) || !(opts.window >= 0.0)) throw DomainError("covering: bad options");
    const double dt = log.times[1] - log.times[0];

    std::size_t i0 = 0;
    while (i0 < n && log.times[i0] < opts.t_transient - 1e-9 * dt) ++i0;
    std::size_t i1 = i0;
    while (i1 + 1 < n && log.times[i1 + 1] <= opts.t_transient + opts.window + 1e-9 * dt) ++i1;
    if (i0 >= n) throw NoReturnTimes("covering: log ends before the transient");

    const auto k_min = static_cast<std::size_t>(std::max(1.0, std::ceil(opts.t_min / dt - 1e-9)));
    CoveringReport rep;
    bool in_cluster = false;
    for (std::size_t k = k_min; i1 + k < n; ++k) {
        const double T = log.times[k] - log.times[0];
        const double dist = torus_distance(flow.advance(log.p0, T), log.p0);
        if (dist >= opts.return_tol) {
            in_cluster = false;
            continue;
        }
        double e = 0.0;
        for (std::size_t i = i0; i <= i1; ++i) e = std::max(e, (log.z[i + k] - log.z[i]).cwiseAbs().maxCoeff());
        if (!in_cluster) {
            rep.clusters.push_back(ReturnCluster{T, dist, e, 1});
            in_cluster = true;
        } else {
            auto& c = rep.clusters.back();
            c.e = std::max(c.e, e);
            ++c.size;
            if (dist < c.distance) {
                c.distance = dist;
                c.t_best = T;
            }
        }
    }
    if (rep.clusters.size() < 3) {
        throw NoReturnTimes("covering: found " + std::to_string(rep.clusters.size()) +
                            " return times; need 3 (lengthen the run or loosen return_tol)");
    }
    for (const auto& c : rep.clusters) rep.e_max = std::max(rep.e_max, c.e);
    rep.e_last = rep.clusters.back().e;
    const std::size_t third = std::max<std::size_t>(1, rep.clusters.size() / 3);
    double first = 0.0;
    double last = 0.0;
    for (std::size_t i = 0; i < third; ++i) {
        first = std::max(first, rep.clusters[i].e);
        last = std::max(last, rep.clusters[rep.clusters.size() - 1 - i].e);
    }
    rep.nonincreasing_tail = last <= first * (1.0 + 1e-12) + 1e-15;
    return rep;
}

// --- CSV --------------------------------------------------------------------

namespace {

void write_vec(std::ostream& os, const Vector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) os << ',' << format_double(v(i));
}

void header(std::ostream& os, const char* name, Eigen::Index m) {
    for (Eigen::Index i = 1; i <= m; ++i) os << ',' << name << i;
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const TrajectoryLog& log) {
    os << 't';
    header(os, "z", log.m);
    header(os, "zhat", log.m);
    os << ",M\n";
    for (std::size_t k = 0; k < log.times.size(); ++k) {
        os << format_double(log.times[k]);
        write_vec(os, log.z[k]);
        write_vec(os, log.zhat[k]);
        os << ',' << format_double(log.mass[k]) << '\n';
    }
}

void write_pair_csv(std::ostream& os, const PairLog& log) {
    os << 't';
    header(os, "zx", log.m);
    header(os, "zy", log.m);
    header(os, "zhatx", log.m);
    header(os, "zhaty", log.m);
    os << ",Mx,My";
    header(os, "dgap", log.m);
    os << ",diff_now,diff_window,cone_margin\n";
    for (std::size_t k = 0; k < log.times.size(); ++k) {
        os << format_double(log.times[k]);
        write_vec(os, log.zx[k]);
        write_vec(os, log.zy[k]);
        write_vec(os, log.zhatx[k]);
        write_vec(os, log.zhaty[k]);
        os << ',' << format_double(log.mass_x[k]) << ',' << format_double(log.mass_y[k]);
        write_vec(os, log.d_gap[k]);
        os << ',' << format_double(log.diff_now[k]) << ',' << format_double(log.diff_window[k]) << ','
           << format_double(log.cone_margin[k]) << '\n';
    }
}

}  // namespace nfde
