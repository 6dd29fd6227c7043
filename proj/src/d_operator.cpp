#include "nfde/d_operator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nfde/errors.hpp"

namespace nfde {

TrigMatrix::TrigMatrix(Eigen::Index rows, Eigen::Index cols)
    : rows_(rows), cols_(cols), entries_(static_cast<std::size_t>(rows * cols)) {}

TrigMatrix TrigMatrix::identity(Eigen::Index m) {
    TrigMatrix out(m, m);
    for (Eigen::Index i = 0; i < m; ++i) out(i, i) = TrigPoly(1.0);
    return out;
}

TrigMatrix TrigMatrix::constant(const Matrix& value) {
    TrigMatrix out(value.rows(), value.cols());
    for (Eigen::Index i = 0; i < value.rows(); ++i) {
        for (Eigen::Index j = 0; j < value.cols(); ++j) out(i, j) = TrigPoly(value(i, j));
    }
    return out;
}

TrigMatrix TrigMatrix::diagonal(const std::vector<TrigPoly>& diag) {
    const auto m = static_cast<Eigen::Index>(diag.size());
    TrigMatrix out(m, m);
    for (Eigen::Index i = 0; i < m; ++i) out(i, i) = diag[static_cast<std::size_t>(i)];
    return out;
}

Matrix TrigMatrix::eval(const TorusPoint& x) const {
    Matrix out(rows_, cols_);
    for (Eigen::Index i = 0; i < rows_; ++i) {
        for (Eigen::Index j = 0; j < cols_; ++j) out(i, j) = (*this)(i, j).eval(x);
    }
    return out;
}

Matrix TrigMatrix::derivative_along_flow(const TorusFlow& flow, const TorusPoint& x) const {
    Matrix out(rows_, cols_);
    for (Eigen::Index i = 0; i < rows_; ++i) {
        for (Eigen::Index j = 0; j < cols_; ++j) {
            out(i, j) = (*this)(i, j).derivative_along_flow(flow, x);
        }
    }
    return out;
}

bool TrigMatrix::is_constant() const {
    return std::all_of(entries_.begin(), entries_.end(), [](const TrigPoly& p) { return p.is_constant(); });
}

double AtomicMeasureFamily::support() const {
    double s = 0.0;
    for (const auto& a : atoms) s = std::max(s, a.lag);
    if (density) s = std::max(s, density->support());
    return s;
}

DOperatorSpec::DOperatorSpec(TorusFlow flow, TrigMatrix b, AtomicMeasureFamily nu)
    : flow_(std::move(flow)), b_(std::move(b)), nu_(std::move(nu)) {
    const Eigen::Index m = b_.rows();
    if (m < 1 || b_.cols() != m) throw DimensionMismatch("DOperatorSpec: B must be square");
    std::vector<double> lags;
    for (const auto& a : nu_.atoms) {
        if (!(a.lag > 0.0) || !std::isfinite(a.lag)) {
            throw StructuralError("DOperatorSpec: atom lags must be positive (no atom at 0)");
        }
        if (a.weight.rows() != m || a.weight.cols() != m) {
            throw DimensionMismatch("DOperatorSpec: atom weight must be m x m");
        }
        lags.push_back(a.lag);
    }
    std::sort(lags.begin(), lags.end());
    if (std::adjacent_find(lags.begin(), lags.end()) != lags.end()) {
        throw StructuralError("DOperatorSpec: atom lags must be distinct");
    }
    if (nu_.density) {
        if (!(nu_.density->width > 0.0)) throw StructuralError("DOperatorSpec: density cell width must be positive");
        for (const auto& c : nu_.density->cells) {
            if (c.rows() != m || c.cols() != m) throw DimensionMismatch("DOperatorSpec: density cell must be m x m");
        }
    }
}

bool DOperatorSpec::is_scalar_diagonal() const {
    const Eigen::Index m = dim();
    if (nu_.density && !nu_.density->cells.empty()) return false;
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            const TrigPoly& e = b_(i, j);
            if (!e.is_constant() || e.constant() != (i == j ? 1.0 : 0.0)) return false;
        }
    }
    std::vector<int> atoms_per_row(static_cast<std::size_t>(m), 0);
    for (const auto& a : nu_.atoms) {
        for (Eigen::Index i = 0; i < m; ++i) {
            for (Eigen::Index j = 0; j < m; ++j) {
                if (i != j && !a.weight(i, j).is_zero()) return false;
            }
            if (!a.weight(i, i).is_zero()) ++atoms_per_row[static_cast<std::size_t>(i)];
        }
    }
    return std::all_of(atoms_per_row.begin(), atoms_per_row.end(), [](int c) { return c <= 1; });
}

Vector eval_D(const DOperatorSpec& spec, const TorusPoint& p, const HistorySource& hist) {
    if (hist.dim() != spec.dim()) throw DimensionMismatch("eval_D: history dimension differs from m");
    Vector out = spec.b().eval(p) * hist.at(0.0);
    for (const auto& a : spec.nu().atoms) out -= a.weight.eval(p) * hist.at(-a.lag);
    if (const auto& dens = spec.nu().density) {
        for (std::size_t c = 0; c < dens->cells.size(); ++c) {
            const double mid = -(static_cast<double>(c) + 0.5) * dens->width;
            out -= dens->width * (dens->cells[c].eval(p) * hist.at(mid));
        }
    }
    return out;
}

HistoryGrid eval_Dhat_segment(const DOperatorSpec& spec, const TorusPoint& p, const HistoryGrid& hist,
                              Eigen::Index depth) {
    if (depth < 1) throw StructuralError("eval_Dhat_segment: depth must be at least 1");
    const TorusFlow& flow = spec.flow();
    Matrix out(spec.dim(), depth + 1);
    for (Eigen::Index j = 0; j <= depth; ++j) {
        const double s = -static_cast<double>(j) * hist.step();
        out.col(j) = eval_D(spec, flow.advance(p, s), SegmentView(hist, s));
    }
    return HistoryGrid(hist.step(), std::move(out), hist.tail(), hist.origin());
}

HistoryGrid eval_Dhat_segment(const DOperatorSpec& spec, const TorusPoint& p, const HistoryGrid& hist) {
    return eval_Dhat_segment(spec, p, hist, hist.last_index());
}

namespace {

struct PointOperators {
    Matrix binv;
    std::vector<Matrix> binv_atoms;
    std::vector<Matrix> binv_cells;  // already multiplied by the cell width
};

Matrix invert_b(const DOperatorSpec& spec, const TorusPoint& x) {
    const Matrix b = spec.b().eval(x);
    Eigen::FullPivLU<Matrix> lu(b);
    // Eigen's threshold is relative to the largest pivot, so a 1 x 1 B of 1e-17
    // would pass; add an absolute floor scaled by the size of B.
    const double floor = 1e-12 * std::max(1.0, b.cwiseAbs().maxCoeff());
    if (!lu.isInvertible() || lu.matrixLU().diagonal().cwiseAbs().minCoeff() <= floor) {
        throw SingularB("B(omega) is singular at theta = " + format_double(x.theta.front()), x.theta);
    }
    return lu.inverse();
}

PointOperators point_operators(const DOperatorSpec& spec, const TorusPoint& x) {
    PointOperators ops;
    ops.binv = invert_b(spec, x);
    for (const auto& a : spec.nu().atoms) ops.binv_atoms.push_back(ops.binv * a.weight.eval(x));
    if (const auto& dens = spec.nu().density) {
        for (const auto& c : dens->cells) ops.binv_cells.push_back(dens->width * (ops.binv * c.eval(x)));
    }
    return ops;
}

double nu_norm(const PointOperators& ops) {
    const Eigen::Index m = ops.binv.rows();
    Vector rows = Vector::Zero(m);
    for (const auto& w : ops.binv_atoms) rows += w.cwiseAbs().rowwise().sum();
    for (const auto& w : ops.binv_cells) rows += w.cwiseAbs().rowwise().sum();
    return m > 0 ? rows.maxCoeff() : 0.0;
}

double inf_norm(const Matrix& a) { return a.cwiseAbs().rowwise().sum().maxCoeff(); }

}  // namespace

PointNorms point_norms(const DOperatorSpec& spec, const TorusPoint& x) {
    const PointOperators ops = point_operators(spec, x);
    return PointNorms{nu_norm(ops), inf_norm(ops.binv), inf_norm(spec.b().eval(x))};
}

StabilityEstimate stability_margin(const DOperatorSpec& spec, const OmegaSampling& sampling, double guard) {
    const auto pts = sample_points(spec.flow(), sampling);
    std::vector<PointNorms> norms(pts.size());
    parallel_for(pts.size(), [&](std::size_t i) { norms[i] = point_norms(spec, pts[i]); });

    StabilityEstimate est;
    est.sample_count = pts.size();
    est.worst_point = pts.front();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (norms[i].lambda > est.lambda) {
            est.lambda = norms[i].lambda;
            est.worst_point = pts[i];
        }
        est.binv_sup = std::max(est.binv_sup, norms[i].binv_norm);
        est.b_sup = std::max(est.b_sup, norms[i].b_norm);
    }
    if (est.lambda >= 1.0 - guard) {
        throw UnstableMargin("stability margin lambda = " + format_double(est.lambda) + " is not below 1",
                             est.lambda);
    }
    est.k_bound = est.binv_sup / (1.0 - est.lambda);
    return est;
}

PositivityReport check_positivity(const DOperatorSpec& spec, const OmegaSampling& sampling) {
    const auto pts = sample_points(spec.flow(), sampling);
    PositivityReport rep;
    rep.min_binv = std::numeric_limits<double>::infinity();
    rep.min_binv_nu = std::numeric_limits<double>::infinity();
    rep.worst_point = pts.front();
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& x : pts) {
        const PointOperators ops = point_operators(spec, x);
        const double a = ops.binv.minCoeff();
        double b = std::numeric_limits<double>::infinity();
        for (const auto& w : ops.binv_atoms) b = std::min(b, w.minCoeff());
        for (const auto& w : ops.binv_cells) b = std::min(b, w.minCoeff());
        rep.min_binv = std::min(rep.min_binv, a);
        rep.min_binv_nu = std::min(rep.min_binv_nu, b);
        if (std::min(a, b) < worst) {
            worst = std::min(a, b);
            rep.worst_point = x;
        }
    }
    if (!std::isfinite(rep.min_binv_nu)) rep.min_binv_nu = 0.0;  // no measure at all
    return rep;
}

namespace {

struct NodeOperators {
    std::vector<PointOperators> ops;
    double lambda = 0.0;
    double binv_sup = 0.0;
    double b_sup = 0.0;
};

NodeOperators node_operators(const DOperatorSpec& spec, const TorusPoint& p, const HistoryGrid& grid) {
    NodeOperators out;
    out.ops.resize(static_cast<std::size_t>(grid.num_nodes()));
    for (Eigen::Index j = 0; j < grid.num_nodes(); ++j) {
        const TorusPoint x = spec.flow().advance(p, -static_cast<double>(j) * grid.step());
        auto& ops = out.ops[static_cast<std::size_t>(j)];
        ops = point_operators(spec, x);
        out.lambda = std::max(out.lambda, nu_norm(ops));
        out.binv_sup = std::max(out.binv_sup, inf_norm(ops.binv));
        out.b_sup = std::max(out.b_sup, inf_norm(spec.b().eval(x)));
    }
    return out;
}

// One application of x -> B^-1 yhat + L x on the grid.
Matrix neumann_step(const DOperatorSpec& spec, const NodeOperators& nodes, const Matrix& b_inv_y,
                    const HistoryGrid& x) {
    Matrix next = b_inv_y;
    const auto& atoms = spec.nu().atoms;
    for (Eigen::Index j = 0; j < x.num_nodes(); ++j) {
        const double s = -static_cast<double>(j) * x.step();
        const auto& ops = nodes.ops[static_cast<std::size_t>(j)];
        for (std::size_t k = 0; k < atoms.size(); ++k) next.col(j) += ops.binv_atoms[k] * x.at(s - atoms[k].lag);
        if (const auto& dens = spec.nu().density) {
            for (std::size_t c = 0; c < dens->cells.size(); ++c) {
                const double mid = s - (static_cast<double>(c) + 0.5) * dens->width;
                next.col(j) += ops.binv_cells[c] * x.at(mid);
            }
        }
    }
    return next;
}

Matrix apply_binv(const NodeOperators& nodes, const HistoryGrid& yhat) {
    Matrix out(yhat.dim(), yhat.num_nodes());
    for (Eigen::Index j = 0; j < yhat.num_nodes(); ++j) {
        out.col(j) = nodes.ops[static_cast<std::size_t>(j)].binv * yhat.samples().col(j);
    }
    return out;
}

}  // namespace

HistoryGrid neumann_partial_sum(const DOperatorSpec& spec, const TorusPoint& p, const HistoryGrid& yhat,
                                int terms) {
    if (yhat.dim() != spec.dim()) throw DimensionMismatch("neumann_partial_sum: dimension mismatch");
    const NodeOperators nodes = node_operators(spec, p, yhat);
    const Matrix b_inv_y = apply_binv(nodes, yhat);
    HistoryGrid x(yhat.step(), b_inv_y, yhat.tail(), yhat.origin());
    for (int n = 0; n < terms; ++n) {
        x = HistoryGrid(yhat.step(), neumann_step(spec, nodes, b_inv_y, x), yhat.tail(), yhat.origin());
    }
    return x;
}

InversionResult invert_Dhat_detailed(const DOperatorSpec& spec, const TorusPoint& p, const HistoryGrid& yhat,
                                     double tol, const StabilityEstimate* estimate) {
    if (!(tol > 0.0)) throw StructuralError("invert_Dhat: tol must be positive");
    if (yhat.dim() != spec.dim()) throw DimensionMismatch("invert_Dhat: dimension mismatch");
    const NodeOperators nodes = node_operators(spec, p, yhat);

    // The visited nodes give an exact bound for this grid; a sampled estimate can only raise it.
    double lambda = nodes.lambda;
    double binv_sup = nodes.binv_sup;
    double b_sup = nodes.b_sup;
    if (estimate != nullptr) {
        lambda = std::max(lambda, estimate->lambda);
        binv_sup = std::max(binv_sup, estimate->binv_sup);
        b_sup = std::max(b_sup, estimate->b_sup);
    }
    if (lambda >= 1.0) {
        throw UnstableMargin("invert_Dhat: lambda = " + format_double(lambda) + " is not below 1", lambda);
    }

    // ||x - x_N|| <= lambda^(N+1) ||B^-1|| ||yhat|| / (1 - lambda); the round-trip
    // residual carries one extra factor ||B||.
    const double scale = binv_sup * std::max(1.0, b_sup) * sup_norm(yhat) / (1.0 - lambda);
    int terms = 0;
    double tail = scale * lambda;
    while (tail > tol && terms < 100000) {
        ++terms;
        tail *= lambda;
    }

    const Matrix b_inv_y = apply_binv(nodes, yhat);
    HistoryGrid x(yhat.step(), b_inv_y, yhat.tail(), yhat.origin());
    for (int n = 0; n < terms; ++n) {
        x = HistoryGrid(yhat.step(), neumann_step(spec, nodes, b_inv_y, x), yhat.tail(), yhat.origin());
    }
    return InversionResult{std::move(x), terms, lambda, tail};
}

HistoryGrid invert_Dhat(const DOperatorSpec& spec, const TorusPoint& p, const HistoryGrid& yhat, double tol,
                        const StabilityEstimate* estimate) {
    return invert_Dhat_detailed(spec, p, yhat, tol, estimate).x;
}

Vector dstar_eval(const DOperatorSpec& spec, const TorusPoint& p, const HistoryGrid& yhat, double tol,
                  const StabilityEstimate* estimate) {
    return invert_Dhat(spec, p, yhat, tol, estimate).node(0);
}

double probe_phi(double rho, double s) {
    if (s <= -2.0 * rho) return 0.0;
    if (s <= -rho) return s / rho + 2.0;
    return 1.0;
}

Matrix extract_atom_at_zero(const DOperatorSpec& spec, const TorusPoint& p, double rho) {
    if (!(rho > 0.0)) throw StructuralError("extract_atom_at_zero: rho must be positive");
    const Eigen::Index m = spec.dim();
    Matrix out(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        FunctionHistory probe(m, [rho, i, m](double s) {
            Vector v = Vector::Zero(m);
            v(i) = probe_phi(rho, s);
            return v;
        });
        out.col(i) = eval_D(spec, p, probe);
    }
    return out;
}

}  // namespace nfde
