#pragma once

#include <optional>
#include <vector>

#include "nfde/base_flow.hpp"
#include "nfde/history.hpp"
#include "nfde/sampling.hpp"

namespace nfde {

/// An m x n matrix of almost periodic coefficients.
class TrigMatrix {
  public:
    TrigMatrix() = default;
    TrigMatrix(Eigen::Index rows, Eigen::Index cols);

    static TrigMatrix identity(Eigen::Index m);
    static TrigMatrix constant(const Matrix& value);
    static TrigMatrix diagonal(const std::vector<TrigPoly>& diag);

    Eigen::Index rows() const { return rows_; }
    Eigen::Index cols() const { return cols_; }

    TrigPoly& operator()(Eigen::Index i, Eigen::Index j) { return entries_[index(i, j)]; }
    const TrigPoly& operator()(Eigen::Index i, Eigen::Index j) const { return entries_[index(i, j)]; }

    Matrix eval(const TorusPoint& x) const;
    Matrix derivative_along_flow(const TorusFlow& flow, const TorusPoint& x) const;
    bool is_constant() const;

  private:
    std::size_t index(Eigen::Index i, Eigen::Index j) const {
        return static_cast<std::size_t>(i * cols_ + j);
    }

    Eigen::Index rows_ = 0;
    Eigen::Index cols_ = 0;
    std::vector<TrigPoly> entries_;
};

struct MeasureAtom {
    double lag = 0.0;  // the atom sits at s = -lag
    TrigMatrix weight;
};

/// Piecewise-constant matrix density; cell c covers [-(c+1) width, -c width).
struct MeasureDensity {
    double width = 0.0;
    std::vector<TrigMatrix> cells;

    double support() const { return width * static_cast<double>(cells.size()); }
};

/// The measure family nu(omega): finitely many atoms at negative lags plus an
/// optional density. No mass at s = 0.
struct AtomicMeasureFamily {
    std::vector<MeasureAtom> atoms;
    std::optional<MeasureDensity> density;

    /// Largest |s| touched by the measure.
    double support() const;
};

/// D(omega, x) = B(omega) x(0) - int [d nu(omega)] x.
class DOperatorSpec {
  public:
    DOperatorSpec(TorusFlow flow, TrigMatrix b, AtomicMeasureFamily nu);

    Eigen::Index dim() const { return b_.rows(); }
    const TorusFlow& flow() const { return flow_; }
    const TrigMatrix& b() const { return b_; }
    const AtomicMeasureFamily& nu() const { return nu_; }

    /// True when B is the identity and every atom weight is a constant-free
    /// diagonal with at most one atom per component, i.e. the operator acts as
    /// z_i(0) - c_i(omega) z_i(-alpha_i).
    bool is_scalar_diagonal() const;

  private:
    TorusFlow flow_;
    TrigMatrix b_;
    AtomicMeasureFamily nu_;
};

Vector eval_D(const DOperatorSpec& spec, const TorusPoint& p, const HistorySource& hist);

/// s -> D(p . s, x_s) on the nodes 0, -h, ..., -depth h of hist's grid.
HistoryGrid eval_Dhat_segment(const DOperatorSpec& spec, const TorusPoint& p,
                              const HistoryGrid& hist, Eigen::Index depth);
/// Full-depth variant.
HistoryGrid eval_Dhat_segment(const DOperatorSpec& spec, const TorusPoint& p,
                              const HistoryGrid& hist);

/// Pointwise operator norms at one base point.
struct PointNorms {
    double lambda = 0.0;     // ||B^-1 nu||_inf over (-inf, 0]
    double binv_norm = 0.0;  // ||B^-1||_inf
    double b_norm = 0.0;     // ||B||_inf
};

/// Throws SingularB when B(x) is not invertible.
PointNorms point_norms(const DOperatorSpec& spec, const TorusPoint& x);

struct StabilityEstimate {
    double lambda = 0.0;
    double k_bound = 0.0;
    double binv_sup = 0.0;
    double b_sup = 0.0;
    std::size_t sample_count = 0;
    TorusPoint worst_point;
};

inline constexpr double kDefaultMarginGuard = 1e-6;

/// Samples sup ||B^-1 nu|| over the base and derives the inverse bound
/// k = sup ||B^-1|| / (1 - lambda). Throws SingularB or UnstableMargin.
StabilityEstimate stability_margin(const DOperatorSpec& spec, const OmegaSampling& sampling,
                                   double guard = kDefaultMarginGuard);

/// Sign part of the positivity hypothesis: B^-1 >= 0 and B^-1 nu a positive measure.
struct PositivityReport {
    double min_binv = 0.0;
    double min_binv_nu = 0.0;
    TorusPoint worst_point;

    bool holds(double tol = 0.0) const { return min_binv >= -tol && min_binv_nu >= -tol; }
};

PositivityReport check_positivity(const DOperatorSpec& spec, const OmegaSampling& sampling);

struct InversionResult {
    HistoryGrid x;
    int terms = 0;             // number of series terms beyond the first
    double lambda_used = 0.0;  // contraction factor used for truncation
    double tail_bound = 0.0;   // a-priori bound on the truncation error
};

/// Partial sums of sum_n L^n B^-1 yhat on yhat's grid, truncated once the
/// geometric tail drops below tol. Throws UnstableMargin if the operator is not
/// a contraction at the visited base points.
InversionResult invert_Dhat_detailed(const DOperatorSpec& spec, const TorusPoint& p,
                                     const HistoryGrid& yhat, double tol,
                                     const StabilityEstimate* estimate = nullptr);

HistoryGrid invert_Dhat(const DOperatorSpec& spec, const TorusPoint& p, const HistoryGrid& yhat,
                        double tol, const StabilityEstimate* estimate = nullptr);

/// The first `terms + 1` terms of the series, without any truncation logic.
HistoryGrid neumann_partial_sum(const DOperatorSpec& spec, const TorusPoint& p,
                                const HistoryGrid& yhat, int terms);

/// D*(p, yhat): value at s = 0 of the inverse lift.
Vector dstar_eval(const DOperatorSpec& spec, const TorusPoint& p, const HistoryGrid& yhat,
                  double tol, const StabilityEstimate* estimate = nullptr);

/// Probe function equal to 1 on (-rho, 0], linear down to 0 at -2 rho.
double probe_phi(double rho, double s);

/// Columns D(p, phi_rho e_i). Recovers B(p) once 2 rho is below the smallest lag.
Matrix extract_atom_at_zero(const DOperatorSpec& spec, const TorusPoint& p, double rho);

}  // namespace nfde
