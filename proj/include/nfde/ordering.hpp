#pragma once

#include <optional>

#include "nfde/d_operator.hpp"
#include "nfde/history.hpp"

namespace nfde {

inline constexpr double kDefaultConeTol = 1e-9;

/// Exponential ordering cone: x <=_A y when x <= y and
/// y(t) - x(t) >= e^{A(t-s)} (y(s) - x(s)) for -rho <= s <= t <= 0.
/// A missing horizon means rho = infinity, which needs A Hurwitz.
struct ConeSpec {
    Matrix a;
    std::optional<double> horizon;
    /// Accept an infinite horizon for an A whose Hurwitz property cannot be
    /// certified by the triangular or Gershgorin tests.
    bool assume_hurwitz = false;

    static ConeSpec diagonal(const std::vector<double>& diag, std::optional<double> horizon);

    bool infinite() const { return !horizon.has_value(); }
    /// Throws StructuralError / NotHurwitz when the cone is not admissible.
    void validate() const;
};

struct OrderReport {
    bool ordered = true;
    double min_margin = 0.0;  // most negative slack, 0 if none
    double witness_t = 0.0;   // later time of the worst pair
    double witness_s = 0.0;   // earlier time of the worst pair (== witness_t for sign violations)
    Eigen::Index witness_component = -1;
};

bool is_quasipositive(const Matrix& a);

/// Sufficient Hurwitz tests: exact for triangular A, Gershgorin discs otherwise.
/// Returns nullopt when neither test is conclusive.
std::optional<bool> hurwitz_certificate(const Matrix& a);

/// exp(A t), t >= 0. Diagonal A is exponentiated entrywise; otherwise scaling
/// and squaring over a Taylor series truncated below 1e-16 relative.
Matrix matrix_exp(const Matrix& a, double t);

/// Checks y - x >= -tol on the grid and the exponential condition between
/// consecutive grid nodes inside the horizon. For quasipositive A the factor
/// e^{Ah} is nonnegative, so consecutive pairs imply all pairs by chaining.
OrderReport cone_membership(const HistoryGrid& x, const HistoryGrid& y, const ConeSpec& cone,
                            double tol_cone = kDefaultConeTol);

/// Same check on v = y - x directly.
OrderReport cone_membership_of_difference(const HistoryGrid& v, const ConeSpec& cone,
                                          double tol_cone = kDefaultConeTol);

/// (p, x) <=_{D,A} (p, y): the cone check applied to the lifted histories.
OrderReport transformed_cone_membership(const DOperatorSpec& spec, const TorusPoint& p,
                                        const HistoryGrid& x, const HistoryGrid& y,
                                        const ConeSpec& cone, double tol_cone = kDefaultConeTol);

struct ComparisonFunction {
    HistoryGrid y;
    double k0 = 0.0;  // smallest component over the grid
};

/// Strictly positive element of the cone. Finite horizon: the solution of
/// y' = A y + 1 on [-rho, 0] with y == 1 before -rho. Infinite horizon: the
/// constant -A^-1 1.
ComparisonFunction make_comparison_upper(const ConeSpec& cone, Eigen::Index m, double step,
                                         Eigen::Index nodes_back);

}  // namespace nfde
