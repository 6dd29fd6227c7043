#pragma once

#include <Eigen/Dense>
#include <functional>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace nfde {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Anything that can be read as a function (-inf, 0] -> R^m.
///
/// Implementations: HistoryGrid (sampled data), SegmentView (a shifted window
/// into another source), FunctionHistory (closed form), and the integrator's
/// dense trajectory buffer.
class HistorySource {
  public:
    virtual ~HistorySource() = default;

    virtual Eigen::Index dim() const = 0;
    virtual Vector at(double s) const = 0;
    /// Length of the window backed by data. Queries further back use a tail rule.
    virtual double horizon() const = 0;
    /// Natural spacing for quadrature over this source.
    virtual double step() const = 0;
};

enum class TailPolicy { ConstantExtension, ZeroExtension };

/// Cubic Hermite interpolant on [0, width] with values y0, y1 and slopes d0, d1
/// at the left and right ends, evaluated at offset u * width.
double hermite_cubic(double y0, double d0, double y1, double d1, double width, double u);
/// Derivative of the same interpolant with respect to the offset.
double hermite_cubic_slope(double y0, double d0, double y1, double d1, double width, double u);

/// Uniformly sampled history on the nodes 0, -h, ..., -J h (most recent first).
///
/// Off-node values use cubic Hermite interpolation between the two enclosing
/// nodes, with node slopes estimated from a five-point Lagrange stencil
/// (shifted inward at the ends, so the interpolant reproduces cubics exactly).
/// With only two nodes the stencil degenerates and the interpolant is linear.
class HistoryGrid final : public HistorySource {
  public:
    HistoryGrid(double step, Matrix samples, TailPolicy tail = TailPolicy::ConstantExtension,
                double origin = 0.0);

    static HistoryGrid constant(double step, Eigen::Index nodes_back, const Vector& value,
                                TailPolicy tail = TailPolicy::ConstantExtension);
    static HistoryGrid from_function(double step, Eigen::Index nodes_back,
                                     const std::function<Vector(double)>& f,
                                     TailPolicy tail = TailPolicy::ConstantExtension);
    /// Samples another source on a new grid.
    static HistoryGrid sample(const HistorySource& src, double step, Eigen::Index nodes_back,
                              TailPolicy tail = TailPolicy::ConstantExtension);

    Eigen::Index dim() const override { return samples_.rows(); }
    Vector at(double s) const override;
    double horizon() const override { return step_ * static_cast<double>(last_index()); }
    double step() const override { return step_; }

    /// J: index of the oldest node.
    Eigen::Index last_index() const { return samples_.cols() - 1; }
    Eigen::Index num_nodes() const { return samples_.cols(); }
    TailPolicy tail() const { return tail_; }
    /// Absolute time of the node s = 0; advanced by shift_append.
    double origin() const { return origin_; }

    /// Value at node j, i.e. at s = -j h.
    Vector node(Eigen::Index j) const { return samples_.col(j); }
    const Matrix& samples() const { return samples_; }

    /// Estimated ds-derivative at node j.
    Vector node_slope(Eigen::Index j) const;

    HistoryGrid with_tail(TailPolicy tail) const;

  private:
    double slope_component(Eigen::Index row, Eigen::Index j) const;

    double step_;
    Matrix samples_;
    TailPolicy tail_;
    double origin_;
};

Vector sample_at(const HistorySource& hist, double s);

/// Max-norm over grid samples (the interpolant may overshoot between nodes).
double sup_norm(const HistoryGrid& hist);
/// Max-norm over the grid samples with s in [-n, 0].
double seminorm_n(const HistoryGrid& hist, int n);

inline constexpr int kDefaultMetricTerms = 30;

/// Truncated compact-open metric sum_{n<=n_max} 2^-n u_n / (1 + u_n) plus the
/// tail bound 2^-n_max u / (1 + u), u = sup_norm(x - y). Grids of different
/// step are compared after resampling y onto x's grid.
double compact_open_metric(const HistoryGrid& x, const HistoryGrid& y,
                           int n_max = kDefaultMetricTerms);

/// Appends samples at the recent end (oldest first in `new_samples`), drops the
/// oldest nodes so the node count is unchanged, and advances the origin.
HistoryGrid shift_append(const HistoryGrid& hist, std::span<const Vector> new_samples);

HistoryGrid operator+(const HistoryGrid& a, const HistoryGrid& b);
HistoryGrid operator-(const HistoryGrid& a, const HistoryGrid& b);
HistoryGrid operator*(double k, const HistoryGrid& a);

/// The segment x_t: s -> base(t + s), t <= 0.
class SegmentView final : public HistorySource {
  public:
    SegmentView(const HistorySource& base, double offset);

    Eigen::Index dim() const override { return base_->dim(); }
    Vector at(double s) const override;
    double horizon() const override;
    double step() const override { return base_->step(); }
    double offset() const { return offset_; }

  private:
    const HistorySource* base_;
    double offset_;
};

/// A closed-form history.
class FunctionHistory final : public HistorySource {
  public:
    FunctionHistory(Eigen::Index dim, std::function<Vector(double)> f, double quad_step = 1e-3);

    Eigen::Index dim() const override { return dim_; }
    Vector at(double s) const override;
    double horizon() const override { return std::numeric_limits<double>::infinity(); }
    double step() const override { return quad_step_; }

  private:
    Eigen::Index dim_;
    std::function<Vector(double)> f_;
    double quad_step_;
};

/// CSV with header `s,z1,...,zm`, rows in decreasing s starting at 0.
void write_history_csv(std::ostream& os, const HistoryGrid& hist);
HistoryGrid read_history_csv(std::istream& is, TailPolicy tail = TailPolicy::ConstantExtension);

/// Formats a double with 17 significant digits.
std::string format_double(double v);

}  // namespace nfde
