#pragma once

#include <cstddef>
#include <vector>

namespace nfde {

/// Default rotation number, the golden mean (sqrt(5) - 1) / 2.
inline constexpr double kGoldenFrequency = 0.61803398874989484820;

/// A point on the d-torus, angles measured in cycles and kept in [0, 1).
struct TorusPoint {
    std::vector<double> theta;

    std::size_t dim() const { return theta.size(); }
};

/// Linear flow theta -> theta + t * freqs (mod 1) on the d-torus.
///
/// Minimality requires the frequencies to be rationally independent together
/// with 1. That is not checked here; the caller picks the frequencies.
class TorusFlow {
  public:
    explicit TorusFlow(std::vector<double> freqs);
    /// One-dimensional flow with the golden-mean frequency.
    static TorusFlow golden();

    std::size_t dim() const { return freqs_.size(); }
    const std::vector<double>& freqs() const { return freqs_; }

    TorusPoint point(std::vector<double> theta) const;
    TorusPoint origin() const;

    /// Returns p . t.
    TorusPoint advance(const TorusPoint& p, double t) const;

  private:
    std::vector<double> freqs_;
};

/// Reduces x into [0, 1).
double wrap_unit(double x);

/// Max-norm distance on the torus, each coordinate measured modulo 1.
double torus_distance(const TorusPoint& a, const TorusPoint& b);

struct TrigTerm {
    std::vector<int> k;
    double cos_coeff = 0.0;
    double sin_coeff = 0.0;
};

/// constant + sum_k [a_k cos(2 pi <k, theta>) + b_k sin(2 pi <k, theta>)].
class TrigPoly {
  public:
    TrigPoly() = default;
    TrigPoly(double constant);  // NOLINT: implicit on purpose, constants read naturally
    TrigPoly(double constant, std::vector<TrigTerm> terms);

    static TrigPoly cosine(std::vector<int> k, double coeff, double constant = 0.0);
    static TrigPoly sine(std::vector<int> k, double coeff, double constant = 0.0);

    double constant() const { return constant_; }
    const std::vector<TrigTerm>& terms() const { return terms_; }

    /// True when every coefficient, including the constant, is exactly zero.
    bool is_zero() const;
    /// True when there are no oscillating terms with nonzero coefficients.
    bool is_constant() const;

    /// Upper bound for |p| on the whole torus: |constant| + sum(|a| + |b|).
    double abs_bound() const;

    double eval(const TorusPoint& x) const;
    /// d/dt p(x . t) at t = 0.
    double derivative_along_flow(const TorusFlow& flow, const TorusPoint& x) const;

    TrigPoly scaled(double factor) const;

  private:
    void check_dim(std::size_t d) const;

    double constant_ = 0.0;
    std::vector<TrigTerm> terms_;
};

inline double eval_trig(const TrigPoly& p, const TorusPoint& x) { return p.eval(x); }

inline double derivative_along_flow(const TrigPoly& p, const TorusFlow& flow, const TorusPoint& x) {
    return p.derivative_along_flow(flow, x);
}

}  // namespace nfde
