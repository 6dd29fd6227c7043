#include "nfde/history.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "nfde/errors.hpp"

namespace nfde {

namespace {

// Node-coordinate tolerance used to snap queries onto grid nodes.
constexpr double kNodeSnap = 1e-9;

// d/dx of the Lagrange interpolant through nodes p at x = p[c], as weights.
std::vector<double> lagrange_slope_weights(const std::vector<double>& p, std::size_t c) {
    const std::size_t n = p.size();
    std::vector<double> w(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (i == c) {
            double s = 0.0;
            for (std::size_t l = 0; l < n; ++l) {
                if (l != c) s += 1.0 / (p[c] - p[l]);
            }
            w[i] = s;
            continue;
        }
        double prod = 1.0 / (p[i] - p[c]);
        for (std::size_t l = 0; l < n; ++l) {
            if (l == i || l == c) continue;
            prod *= (p[c] - p[l]) / (p[i] - p[l]);
        }
        w[i] = prod;
    }
    return w;
}

}  // namespace

double hermite_cubic(double y0, double d0, double y1, double d1, double width, double u) {
    const double u2 = u * u;
    const double u3 = u2 * u;
    const double h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
    const double h10 = u3 - 2.0 * u2 + u;
    const double h01 = -2.0 * u3 + 3.0 * u2;
    const double h11 = u3 - u2;
    return h00 * y0 + h10 * width * d0 + h01 * y1 + h11 * width * d1;
}

double hermite_cubic_slope(double y0, double d0, double y1, double d1, double width, double u) {
    const double u2 = u * u;
    const double dh00 = 6.0 * u2 - 6.0 * u;
    const double dh10 = 3.0 * u2 - 4.0 * u + 1.0;
    const double dh01 = -6.0 * u2 + 6.0 * u;
    const double dh11 = 3.0 * u2 - 2.0 * u;
    return (dh00 * y0 + dh01 * y1) / width + dh10 * d0 + dh11 * d1;
}

HistoryGrid::HistoryGrid(double step, Matrix samples, TailPolicy tail, double origin)
    : step_(step), samples_(std::move(samples)), tail_(tail), origin_(origin) {
    if (!(step_ > 0.0) || !std::isfinite(step_)) {
        throw StructuralError("HistoryGrid: step must be positive and finite");
    }
    if (samples_.rows() < 1) throw StructuralError("HistoryGrid: dimension must be at least 1");
    if (samples_.cols() < 2) throw StructuralError("HistoryGrid: need at least two nodes (J >= 1)");
    if (!samples_.allFinite()) throw StructuralError("HistoryGrid: non-finite sample");
}

HistoryGrid HistoryGrid::constant(double step, Eigen::Index nodes_back, const Vector& value,
                                  TailPolicy tail) {
    Matrix s(value.size(), nodes_back + 1);
    s.colwise() = value;
    return HistoryGrid(step, std::move(s), tail);
}

HistoryGrid HistoryGrid::from_function(double step, Eigen::Index nodes_back,
                                       const std::function<Vector(double)>& f, TailPolicy tail) {
    const Vector first = f(0.0);
    Matrix s(first.size(), nodes_back + 1);
    s.col(0) = first;
    for (Eigen::Index j = 1; j <= nodes_back; ++j) {
        const Vector v = f(-static_cast<double>(j) * step);
        if (v.size() != first.size()) throw DimensionMismatch("from_function: inconsistent dimension");
        s.col(j) = v;
    }
    return HistoryGrid(step, std::move(s), tail);
}

HistoryGrid HistoryGrid::sample(const HistorySource& src, double step, Eigen::Index nodes_back,
                                TailPolicy tail) {
    return from_function(step, nodes_back, [&src](double s) { return src.at(s); }, tail);
}

HistoryGrid HistoryGrid::with_tail(TailPolicy tail) const {
    return HistoryGrid(step_, samples_, tail, origin_);
}

double HistoryGrid::slope_component(Eigen::Index row, Eigen::Index j) const {
    const Eigen::Index last = last_index();
    const Eigen::Index n = std::min<Eigen::Index>(5, last + 1);
    const Eigen::Index start = std::clamp<Eigen::Index>(j - (n - 1) / 2, 0, last + 1 - n);
    std::vector<double> pos(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) pos[static_cast<std::size_t>(i)] = -static_cast<double>(start + i);
    const auto w = lagrange_slope_weights(pos, static_cast<std::size_t>(j - start));
    double d = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) d += w[static_cast<std::size_t>(i)] * samples_(row, start + i);
    return d / step_;
}

Vector HistoryGrid::node_slope(Eigen::Index j) const {
    Vector d(dim());
    for (Eigen::Index r = 0; r < dim(); ++r) d(r) = slope_component(r, j);
    return d;
}

Vector HistoryGrid::at(double s) const {
    if (s > 1e-12 * std::max(1.0, step_)) {
        throw DomainError("HistoryGrid: query at s = " + format_double(s) + " > 0");
    }
    const double x = std::max(0.0, -s / step_);
    const auto last = static_cast<double>(last_index());
    if (x > last + kNodeSnap) {
        if (tail_ == TailPolicy::ConstantExtension) return samples_.col(last_index());
        return Vector::Zero(dim());
    }
    const double jr = std::round(x);
    if (std::abs(x - jr) <= kNodeSnap) return samples_.col(static_cast<Eigen::Index>(jr));

    const auto newer = static_cast<Eigen::Index>(std::floor(x));
    const Eigen::Index older = newer + 1;
    const double u = static_cast<double>(older) - x;  // fraction of the way from older to newer
    Vector out(dim());
    for (Eigen::Index r = 0; r < dim(); ++r) {
        out(r) = hermite_cubic(samples_(r, older), slope_component(r, older), samples_(r, newer),
                               slope_component(r, newer), step_, u);
    }
    return out;
}

Vector sample_at(const HistorySource& hist, double s) { return hist.at(s); }

double sup_norm(const HistoryGrid& hist) { return hist.samples().cwiseAbs().maxCoeff(); }

double seminorm_n(const HistoryGrid& hist, int n) {
    double best = 0.0;
    for (Eigen::Index j = 0; j <= hist.last_index(); ++j) {
        if (static_cast<double>(j) * hist.step() > n + kNodeSnap * hist.step()) break;
        best = std::max(best, hist.samples().col(j).cwiseAbs().maxCoeff());
    }
    return best;
}

double compact_open_metric(const HistoryGrid& x, const HistoryGrid& y, int n_max) {
    if (x.dim() != y.dim()) throw DimensionMismatch("compact_open_metric: dimension mismatch");
    if (n_max < 1) throw StructuralError("compact_open_metric: n_max must be positive");
    const double h = x.step();
    Eigen::Index nodes = x.last_index();
    if (std::abs(y.step() - h) <= 1e-12 * h) {
        nodes = std::max(nodes, y.last_index());
    } else {
        nodes = std::max<Eigen::Index>(nodes, static_cast<Eigen::Index>(std::ceil(y.horizon() / h)));
    }
    // running sup of |x - y| over nodes with j h <= n
    std::vector<double> u(static_cast<std::size_t>(n_max) + 1, 0.0);
    double total_sup = 0.0;
    for (Eigen::Index j = 0; j <= nodes; ++j) {
        const double s = -static_cast<double>(j) * h;
        const double d = (x.at(s) - y.at(s)).cwiseAbs().maxCoeff();
        total_sup = std::max(total_sup, d);
        const double depth = -s;
        for (int n = 1; n <= n_max; ++n) {
            if (depth <= n + kNodeSnap * h) u[static_cast<std::size_t>(n)] = std::max(u[static_cast<std::size_t>(n)], d);
        }
    }
    double sum = 0.0;
    double weight = 1.0;
    for (int n = 1; n <= n_max; ++n) {
        weight *= 0.5;
        const double un = u[static_cast<std::size_t>(n)];
        sum += weight * un / (1.0 + un);
    }
    return sum + weight * total_sup / (1.0 + total_sup);
}

HistoryGrid shift_append(const HistoryGrid& hist, std::span<const Vector> new_samples) {
    const Eigen::Index count = static_cast<Eigen::Index>(new_samples.size());
    const Eigen::Index n = hist.num_nodes();
    Matrix out(hist.dim(), n);
    for (Eigen::Index j = 0; j < n; ++j) {
        if (j < count) {
            const Vector& v = new_samples[static_cast<std::size_t>(count - 1 - j)];
            if (v.size() != hist.dim()) throw DimensionMismatch("shift_append: dimension mismatch");
            out.col(j) = v;
        } else {
            out.col(j) = hist.samples().col(j - count);
        }
    }
    return HistoryGrid(hist.step(), std::move(out), hist.tail(),
                       hist.origin() + static_cast<double>(count) * hist.step());
}

namespace {

void check_compatible(const HistoryGrid& a, const HistoryGrid& b) {
    if (a.dim() != b.dim() || a.num_nodes() != b.num_nodes() ||
        std::abs(a.step() - b.step()) > 1e-12 * a.step()) {
        throw DimensionMismatch("HistoryGrid arithmetic: grids differ");
    }
}

}  // namespace

HistoryGrid operator+(const HistoryGrid& a, const HistoryGrid& b) {
    check_compatible(a, b);
    return HistoryGrid(a.step(), a.samples() + b.samples(), a.tail(), a.origin());
}

HistoryGrid operator-(const HistoryGrid& a, const HistoryGrid& b) {
    check_compatible(a, b);
    return HistoryGrid(a.step(), a.samples() - b.samples(), a.tail(), a.origin());
}

HistoryGrid operator*(double k, const HistoryGrid& a) {
    return HistoryGrid(a.step(), k * a.samples(), a.tail(), a.origin());
}

SegmentView::SegmentView(const HistorySource& base, double offset) : base_(&base), offset_(offset) {
    if (offset > 1e-12) throw DomainError("SegmentView: offset must be <= 0");
    offset_ = std::min(offset_, 0.0);
}

Vector SegmentView::at(double s) const {
    if (s > 1e-12) throw DomainError("SegmentView: query at s > 0");
    return base_->at(offset_ + std::min(s, 0.0));
}

double SegmentView::horizon() const { return std::max(0.0, base_->horizon() + offset_); }

FunctionHistory::FunctionHistory(Eigen::Index dim, std::function<Vector(double)> f, double quad_step)
    : dim_(dim), f_(std::move(f)), quad_step_(quad_step) {}

Vector FunctionHistory::at(double s) const {
    if (s > 1e-12) throw DomainError("FunctionHistory: query at s > 0");
    Vector v = f_(std::min(s, 0.0));
    if (v.size() != dim_) throw DimensionMismatch("FunctionHistory: wrong dimension");
    return v;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_history_csv(std::ostream& os, const HistoryGrid& hist) {
    os << 's';
    for (Eigen::Index i = 0; i < hist.dim(); ++i) os << ",z" << (i + 1);
    os << '\n';
    for (Eigen::Index j = 0; j <= hist.last_index(); ++j) {
        os << format_double(-static_cast<double>(j) * hist.step());
        for (Eigen::Index i = 0; i < hist.dim(); ++i) os << ',' << format_double(hist.samples()(i, j));
        os << '\n';
    }
}

HistoryGrid read_history_csv(std::istream& is, TailPolicy tail) {
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("history csv: empty input");
    Eigen::Index m = 0;
    {
        std::stringstream ss(line);
        std::string cell;
        std::getline(ss, cell, ',');
        if (cell != "s") throw ConfigError("history csv: header must start with 's'");
        while (std::getline(ss, cell, ',')) {
            ++m;
            if (cell != "z" + std::to_string(m)) throw ConfigError("history csv: bad column '" + cell + "'");
        }
    }
    if (m == 0) throw ConfigError("history csv: no value columns");
    std::vector<double> s_vals;
    std::vector<Vector> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(ss, cell, ',')) {
            try {
                vals.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw ConfigError("history csv: unparsable number '" + cell + "'");
            }
        }
        if (static_cast<Eigen::Index>(vals.size()) != m + 1) throw ConfigError("history csv: ragged row");
        s_vals.push_back(vals[0]);
        rows.push_back(Eigen::Map<Vector>(vals.data() + 1, m));
    }
    if (rows.size() < 2) throw ConfigError("history csv: need at least two rows");
    if (s_vals[0] != 0.0) throw ConfigError("history csv: first row must be s = 0");
    const double h = s_vals[0] - s_vals[1];
    if (!(h > 0.0)) throw ConfigError("history csv: s must decrease");
    for (std::size_t j = 0; j < s_vals.size(); ++j) {
        if (std::abs(s_vals[j] + static_cast<double>(j) * h) > 1e-9 * std::max(1.0, static_cast<double>(j) * h)) {
            throw ConfigError("history csv: non-uniform grid");
        }
    }
    Matrix samples(m, static_cast<Eigen::Index>(rows.size()));
    for (std::size_t j = 0; j < rows.size(); ++j) samples.col(static_cast<Eigen::Index>(j)) = rows[j];
    return HistoryGrid(h, std::move(samples), tail);
}

}  // namespace nfde
