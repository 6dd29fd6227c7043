#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "nfde/compartment.hpp"
#include "nfde/ordering.hpp"

namespace nfde {

inline constexpr double kDivergenceBound = 1e9;

struct SimConfig {
    double h = 0.01;
    double t_end = 10.0;
    double inv_tol = 1e-8;
    int n_trunc = 0;      // 0: smallest n with lambda^n <= inv_tol
    int log_stride = 1;   // log every log_stride steps
    std::optional<ConeSpec> cone;
    double tol_cone = kDefaultConeTol;

    void validate() const;
};

/// Node record of the dense trajectory buffer. Left and right slopes differ at
/// t = 0 and wherever the neutral term carries that kink forward.
struct TrajectoryNode {
    Vector z;
    Vector z_left;
    Vector z_right;
    Vector zhat;
    Vector zhat_left;
    Vector zhat_right;
};

/// State of the transformed equation zhat' = G(omega.t, zhat_t), together
/// with the reconstructed z on the same uniform grid.
///
/// Node k sits at time (k - first_index) h. Everything from the initial
/// segment onward is kept, so any past time can be queried.
class SimState {
  public:
    /// Builds the buffer from an initial z history; see init_from_z.
    SimState(const CompartmentalSystem& sys, const TorusPoint& p0, const HistorySource& z_hist,
             const SimConfig& cfg);

    const CompartmentalSystem& system() const { return sys_; }
    const SimConfig& config() const { return cfg_; }
    const TorusPoint& p0() const { return p0_; }
    double h() const { return cfg_.h; }
    double t() const { return static_cast<double>(steps_) * cfg_.h; }
    long steps() const { return steps_; }
    int n_trunc() const { return n_trunc_; }
    /// Sampled sup of the contraction factor of the D operator.
    double lambda() const { return lambda_; }
    /// Time of the oldest stored node of z (zhat starts later by the atom support).
    double z_start() const { return -static_cast<double>(first_) * cfg_.h; }
    double zhat_start() const { return zhat_start_; }

    TorusPoint base_at(double t) const { return sys_.flow().advance(p0_, t); }

    /// Dense z at any stored time, cubic Hermite between nodes.
    Vector z_at(double t) const;
    Vector zhat_at(double t) const;
    /// Values at the node closest to t.
    const TrajectoryNode& node_at(double t) const;
    const TrajectoryNode& current() const { return nodes_.back(); }

    /// z_t on the grid, depth nodes back.
    HistoryGrid z_segment(double t, Eigen::Index depth) const;
    HistoryGrid zhat_segment(double t, Eigen::Index depth) const;

    /// The segment z_t as a history source reading the buffer.
    class View;

    void step();

  private:
    Vector reconstruct_point(double tau, const TorusPoint& p, const Vector& zhat) const;
    Vector z_slope(double tau, const TorusPoint& p, const Vector& z, const Vector& zhat_slope, bool left) const;
    Vector zhat_slope_from_z(double tau, const TorusPoint& p, const Vector& z, const Vector& z_slope,
                             bool left) const;
    Vector dense(double t, bool hat) const;
    Vector dense_slope(double t, bool left) const;
    long index_of(double t) const;
    void check_finite(const Vector& v, double when) const;

    CompartmentalSystem sys_;
    TorusPoint p0_;
    SimConfig cfg_;
    std::vector<TrajectoryNode> nodes_;
    long first_ = 0;  // index of t = 0
    long steps_ = 0;
    int n_trunc_ = 0;
    double lambda_ = 0.0;
    double zhat_start_ = 0.0;
    bool b_identity_ = false;
};

/// Reads z from the buffer as the segment s -> z(t + s).
class SimState::View final : public HistorySource {
  public:
    View(const SimState& state, double t) : state_(&state), t_(t) {}
    Eigen::Index dim() const override { return state_->system().m; }
    Vector at(double s) const override;
    double horizon() const override { return t_ - state_->z_start(); }
    double step() const override { return state_->h(); }

  private:
    const SimState* state_;
    double t_;
};

/// Horizon of z needed to start a run: pipes, atoms and the reconstruction depth.
double required_z_horizon(const CompartmentalSystem& sys, int n_trunc);

/// Picks n_trunc from the contraction factor when cfg.n_trunc is 0.
int resolve_n_trunc(const CompartmentalSystem& sys, const SimConfig& cfg, double* lambda_out = nullptr);

SimState init_from_z(const CompartmentalSystem& sys, const TorusPoint& p0, const HistorySource& z_hist,
                     const SimConfig& cfg);

/// z(t + s) from the stored zhat alone: the truncated series
/// sum_n c^[n] zhat(t + s - n alpha) for scalar diagonal operators, the
/// Neumann inversion otherwise.
Vector reconstruct_z(const SimState& state, double s);
/// Always the general Neumann path, for cross-checks.
Vector reconstruct_z_general(const SimState& state, double s);
/// A-priori truncation bound of the diagonal series.
double reconstruct_tail_bound(const SimState& state);

struct TrajectoryLog {
    TorusPoint p0;
    Eigen::Index m = 0;
    std::vector<double> times;
    std::vector<Vector> z;
    std::vector<Vector> zhat;
    std::vector<double> mass;

    MassSeries mass_series() const { return MassSeries{p0, times, z, mass}; }
};

TrajectoryLog run(const CompartmentalSystem& sys, const TorusPoint& p0, const HistorySource& z_hist,
                  const SimConfig& cfg);

struct PairLog {
    TorusPoint p0;
    Eigen::Index m = 0;
    std::vector<double> times;
    std::vector<Vector> zx, zy, zhatx, zhaty;
    std::vector<double> cone_margin;
    std::vector<Vector> d_gap;          // D(tau(t,y)) - D(tau(t,x)) per component
    std::vector<double> mass_x, mass_y;
    std::vector<double> diff_now;       // |z^y(t) - z^x(t)|_inf
    std::vector<double> diff_window;    // sup over the pipe and atom window behind t
    OrderReport initial_order;
};

/// Runs both solutions in lockstep. Throws UnorderedInitialData when the
/// transformed initial data are not ordered by cfg.cone.
PairLog run_ordered_pair(const CompartmentalSystem& sys, const TorusPoint& p0, const HistorySource& z_x,
                         const HistorySource& z_y, const SimConfig& cfg);

/// Same, but lets the caller decide what happens with unordered data.
PairLog run_pair(const CompartmentalSystem& sys, const TorusPoint& p0, const HistorySource& z_x,
                 const HistorySource& z_y, const SimConfig& cfg, bool require_ordered);

struct CoveringOptions {
    double return_tol = 1e-2;
    double window = 10.0;      // length of the comparison window
    double t_transient = 100.0;
    double t_min = 1.0;        // smallest return time considered
};

struct ReturnCluster {
    double t_best = 0.0;   // return time with the smallest base distance
    double distance = 0.0; // that distance
    double e = 0.0;        // max over the cluster of sup_window |z(t + T) - z(t)|
    int size = 0;
};

struct CoveringReport {
    std::vector<ReturnCluster> clusters;
    double e_max = 0.0;
    double e_last = 0.0;
    bool nonincreasing_tail = false;  // e over the last third no larger than over the first third
};

/// Evidence for the 1-covering property: near-return times of the base and
/// the matching discrepancies of the solution. Throws NoReturnTimes when
/// fewer than three separate returns fit in the log.
CoveringReport covering_diagnostic(const TrajectoryLog& log, const TorusFlow& flow, const CoveringOptions& opts);

void write_trajectory_csv(std::ostream& os, const TrajectoryLog& log);
void write_pair_csv(std::ostream& os, const PairLog& log);

}  // namespace nfde
