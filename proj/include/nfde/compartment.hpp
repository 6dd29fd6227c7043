#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "nfde/d_operator.hpp"
#include "nfde/history.hpp"
#include "nfde/sampling.hpp"

namespace nfde {

// ---------------------------------------------------------------------------
// Transport functions g(omega, v) = gain(omega) * shape(v)
// ---------------------------------------------------------------------------

struct IdentityShape {};
/// v + eps sin v, eps in [0, 1).
struct SineBendShape {
    double eps = 0.0;
};
/// v / (1 + |v|).
struct SaturateShape {};

class ShapeFn {
  public:
    ShapeFn() = default;
    ShapeFn(IdentityShape s) : v_(s) {}  // NOLINT
    ShapeFn(SineBendShape s);            // NOLINT
    ShapeFn(SaturateShape s) : v_(s) {}  // NOLINT

    double value(double v) const;
    double slope(double v) const;
    /// inf and sup of the slope over the real line.
    std::pair<double, double> slope_bounds() const;
    std::string name() const;

  private:
    std::variant<IdentityShape, SineBendShape, SaturateShape> v_;
};

struct TransportSpec {
    TrigPoly gain;
    ShapeFn shape;

    double eval(const TorusPoint& x, double v) const { return gain.eval(x) * shape.value(v); }
};

/// Transit-time distribution: atoms at s = -lag with weights summing to 1.
struct PipeSpec {
    std::vector<std::pair<double, double>> atoms{{0.0, 1.0}};  // (lag, weight)

    static PipeSpec delay(double lag) { return PipeSpec{{{lag, 1.0}}}; }
    double max_lag() const;
    void validate() const;
};

// ---------------------------------------------------------------------------
// Systems
// ---------------------------------------------------------------------------

/// d/dt D(omega.t, z_t) = F(omega.t, z_t) with
/// F_i = -sum_{j=0..m} g_ji(omega, z_i(0)) + sum_j int g_ij(omega.s, z_j(s)) dmu_ij(s) + I_i(omega).
/// Index convention: transports[i][j] = g_ij carries material from j to i through pipes[i][j].
struct CompartmentalSystem {
    Eigen::Index m = 0;
    std::vector<std::vector<std::optional<TransportSpec>>> transports;
    std::vector<std::optional<TransportSpec>> outflows;  // g_0i
    std::vector<TrigPoly> inflows;                       // I_i
    std::vector<std::vector<PipeSpec>> pipes;
    DOperatorSpec dspec;

    const TorusFlow& flow() const { return dspec.flow(); }
    bool closed() const;
    double max_pipe_lag() const;
    /// Dimension and shape checks; throws StructuralError.
    void validate() const;
};

/// The neutral diagonal family
/// d/dt [z_i(t) - c_i(omega.t) z_i(t - alpha_i)]
///   = -sum_j g_ji(omega.t, z_i(t)) + sum_j g_ij(omega.(t - rho_ij), z_j(t - rho_ij)).
struct NeutralDiagSystem {
    Eigen::Index m = 0;
    TorusFlow flow = TorusFlow::golden();
    std::vector<TrigPoly> c;
    std::vector<double> alpha;
    std::vector<std::vector<double>> rho;
    std::vector<std::vector<std::optional<TransportSpec>>> transports;

    void validate() const;
    /// B = I, nu_ii = c_i delta_{-alpha_i}, mu_ij = delta_{-rho_ij}, no inflow or outflow.
    CompartmentalSystem to_compartmental() const;
};

Vector eval_F(const CompartmentalSystem& sys, const TorusPoint& p, const HistorySource& hist);

/// F composed with the inverse lift, evaluated on a transformed history.
Vector eval_G(const CompartmentalSystem& sys, const TorusPoint& p, const HistoryGrid& yhat, double tol);

/// Sum of the D components plus the material in transit, the latter by the
/// trapezoid rule at the history's natural step.
double total_mass(const CompartmentalSystem& sys, const TorusPoint& p, const HistorySource& hist);

/// What the mass audit needs from a run.
struct MassSeries {
    TorusPoint p0;
    std::vector<double> times;
    std::vector<Vector> z;  // z(t) at each time
    std::vector<double> mass;
};

/// r(t) = M(t) - M(0) - sum_i int_0^t (I_i - g_0i) ds, trapezoid over the logged times.
std::vector<double> mass_balance_residual(const CompartmentalSystem& sys, const MassSeries& log);

// ---------------------------------------------------------------------------
// Coefficient bounds and sufficient conditions for the neutral diagonal family
// ---------------------------------------------------------------------------

struct LipschitzBounds {
    Matrix l_minus;  // l_ij^-(omega)
    Matrix l_plus;   // l_ij^+(omega)
    Vector big_l_plus;  // L_i^+ = sum_j l_ji^+
};

LipschitzBounds lipschitz_bounds(const NeutralDiagSystem& sys, const TorusPoint& p);

/// prod_{j<n} c_i(p . (-j alpha_i)); 1 for n = 0.
double c_product(const NeutralDiagSystem& sys, const TorusPoint& p, Eigen::Index i, int n);

struct PQSequence {
    std::vector<double> p;  // p[0] unused, p[n] for n = 1..N
    std::vector<double> q;  // q[0..N]
    /// scale[n] = c^[n-1](omega . (-rho_ii)), the factor multiplying l_ii^- in p[n].
    std::vector<double> scale;
};

PQSequence pq_sequence(const NeutralDiagSystem& sys, const TorusPoint& p, Eigen::Index i, double a, int n_max);

/// min{t, 0}
inline double neg_part(double t) { return t < 0.0 ? t : 0.0; }

enum class Condition { G3, G4, G5, G8, G9 };

std::string to_string(Condition c);
Condition condition_from_string(const std::string& s);

struct CheckOptions {
    OmegaSampling sampling;
    int n_check = 50;              // depth of the explicit p/q scan for G4
    double strictness_tol = 1e-9;  // margin above which an inequality counts as strict
};

/// Worst sampled value of one inequality for one component.
struct SubMargin {
    std::string name;  // e.g. "G3.1"
    Eigen::Index component = 0;
    double min_margin = 0.0;
    TorusPoint witness;
    bool required_strict = false;
    bool informational = false;  // reported but not part of the verdict
    bool passed = false;
    std::vector<double> values;  // one per sampled point; NaN where not applicable
};

struct ComponentVerdict {
    Eigen::Index component = 0;
    bool vacuous = false;  // c_i == 0 where the condition only constrains c_i != 0
    bool passed = false;
    bool strict = false;   // the "at least one strict" clause
    double worst_margin = 0.0;
    std::string note;
};

struct ConditionReport {
    Condition condition = Condition::G5;
    std::vector<double> a;
    std::vector<TorusPoint> samples;
    std::vector<SubMargin> margins;
    std::vector<ComponentVerdict> components;
    std::vector<std::string> notes;
    bool passed = false;
};

/// Samples the base and reports per-inequality worst margins. Throws
/// StructuralError when the lag relations required by the condition fail.
ConditionReport check_condition(const NeutralDiagSystem& sys, Condition cond, const std::vector<double>& a,
                                const CheckOptions& opts = {});

struct SuggestResult {
    std::vector<double> a;
    std::vector<double> worst_margin;           // per component at the chosen a
    std::vector<std::vector<double>> trials;    // per component, trial values scanned
    std::vector<std::vector<double>> surface;   // per component, worst margin per trial
};

/// Per component, the trial a_i <= 0 with the largest worst margin (ties go
/// toward 0). The value -sup L_i^+ - 1 is always added to the scan.
SuggestResult suggest_a(const NeutralDiagSystem& sys, Condition cond, const std::vector<double>& trial_grid,
                        const CheckOptions& opts = {});

}  // namespace nfde
