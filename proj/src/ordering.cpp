#include "nfde/ordering.hpp"

#include <algorithm>
#include <cmath>

#include "nfde/errors.hpp"

namespace nfde {

namespace {

constexpr double kNodeSnap = 1e-9;

bool is_diagonal(const Matrix& a) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            if (i != j && a(i, j) != 0.0) return false;
        }
    }
    return true;
}

}  // namespace

ConeSpec ConeSpec::diagonal(const std::vector<double>& diag, std::optional<double> horizon) {
    Matrix a = Matrix::Zero(static_cast<Eigen::Index>(diag.size()), static_cast<Eigen::Index>(diag.size()));
    for (std::size_t i = 0; i < diag.size(); ++i) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = diag[i];
    return ConeSpec{std::move(a), horizon, false};
}

void ConeSpec::validate() const {
    if (a.rows() < 1 || a.rows() != a.cols()) throw StructuralError("cone: A must be square");
    if (!a.allFinite()) throw StructuralError("cone: A has non-finite entries");
    if (!is_quasipositive(a)) throw StructuralError("cone: A is not quasipositive");
    if (horizon) {
        if (!(*horizon > 0.0) || !std::isfinite(*horizon)) throw StructuralError("cone: horizon must be positive");
        return;
    }
    const auto cert = hurwitz_certificate(a);
    if (cert.has_value() && !*cert) throw NotHurwitz("cone: infinite horizon needs a Hurwitz A");
    if (!cert.has_value() && !assume_hurwitz) {
        throw NotHurwitz("cone: cannot certify that A is Hurwitz; set assume_hurwitz to override");
    }
}

bool is_quasipositive(const Matrix& a) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            if (i != j && a(i, j) < 0.0) return false;
        }
    }
    return true;
}

std::optional<bool> hurwitz_certificate(const Matrix& a) {
    const bool upper = a.triangularView<Eigen::StrictlyLower>().toDenseMatrix().isZero(0.0);
    const bool lower = a.triangularView<Eigen::StrictlyUpper>().toDenseMatrix().isZero(0.0);
    if (upper || lower) return (a.diagonal().array() < 0.0).all();
    bool rows_ok = true;
    bool cols_ok = true;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        double r = a(i, i);
        double c = a(i, i);
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            if (j == i) continue;
            r += std::abs(a(i, j));
            c += std::abs(a(j, i));
        }
        rows_ok = rows_ok && r < 0.0;
        cols_ok = cols_ok && c < 0.0;
    }
    if (rows_ok || cols_ok) return true;
    return std::nullopt;
}

Matrix matrix_exp(const Matrix& a, double t) {
    if (t < 0.0) throw DomainError("matrix_exp: t must be nonnegative");
    const Eigen::Index m = a.rows();
    if (is_diagonal(a)) {
        Matrix out = Matrix::Zero(m, m);
        for (Eigen::Index i = 0; i < m; ++i) out(i, i) = std::exp(a(i, i) * t);
        return out;
    }
    Matrix x = a * t;
    const double norm = x.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    x /= std::ldexp(1.0, squarings);

    Matrix sum = Matrix::Identity(m, m);
    Matrix term = Matrix::Identity(m, m);
    for (int k = 1; k <= 40; ++k) {
        term = term * x / static_cast<double>(k);
        sum += term;
        if (term.cwiseAbs().maxCoeff() <= 1e-17 * sum.cwiseAbs().maxCoeff()) break;
    }
    for (int i = 0; i < squarings; ++i) sum = sum * sum;
    return sum;
}

OrderReport cone_membership_of_difference(const HistoryGrid& v, const ConeSpec& cone, double tol_cone) {
    cone.validate();
    if (cone.a.rows() != v.dim()) throw DimensionMismatch("cone_membership: A and history dimensions differ");
    const double h = v.step();
    OrderReport rep;
    auto record = [&rep](double slack, double t, double s, Eigen::Index comp) {
        if (slack < rep.min_margin) {
            rep.min_margin = slack;
            rep.witness_t = t;
            rep.witness_s = s;
            rep.witness_component = comp;
        }
    };

    for (Eigen::Index j = 0; j <= v.last_index(); ++j) {
        Eigen::Index comp = 0;
        const double lo = v.samples().col(j).minCoeff(&comp);
        const double t = -static_cast<double>(j) * h;
        record(lo, t, t, comp);
    }

    Eigen::Index last_pair = v.last_index();
    if (cone.horizon) {
        const double rho = *cone.horizon;
        if (v.horizon() < rho - kNodeSnap * h) {
            throw HorizonTooShort("cone_membership: grid does not cover [-rho, 0]");
        }
        last_pair = std::min<Eigen::Index>(last_pair, static_cast<Eigen::Index>(std::floor(rho / h + kNodeSnap)));
    }
    const Matrix e = matrix_exp(cone.a, h);
    for (Eigen::Index j = 0; j < last_pair; ++j) {
        const Vector slack = v.samples().col(j) - e * v.samples().col(j + 1);
        Eigen::Index comp = 0;
        const double lo = slack.minCoeff(&comp);
        record(lo, -static_cast<double>(j) * h, -static_cast<double>(j + 1) * h, comp);
    }
    rep.ordered = rep.min_margin >= -tol_cone;
    return rep;
}

OrderReport cone_membership(const HistoryGrid& x, const HistoryGrid& y, const ConeSpec& cone, double tol_cone) {
    return cone_membership_of_difference(y - x, cone, tol_cone);
}

OrderReport transformed_cone_membership(const DOperatorSpec& spec, const TorusPoint& p, const HistoryGrid& x,
                                        const HistoryGrid& y, const ConeSpec& cone, double tol_cone) {
    // D-hat is linear, so lifting the difference is the same as differencing the lifts.
    return cone_membership(eval_Dhat_segment(spec, p, x), eval_Dhat_segment(spec, p, y), cone, tol_cone);
}

ComparisonFunction make_comparison_upper(const ConeSpec& cone, Eigen::Index m, double step,
                                         Eigen::Index nodes_back) {
    cone.validate();
    if (cone.a.rows() != m) throw DimensionMismatch("make_comparison_upper: A is not m x m");
    const Vector ones = Vector::Ones(m);
    Matrix samples(m, nodes_back + 1);

    if (cone.infinite()) {
        Eigen::FullPivLU<Matrix> lu(cone.a);
        if (!lu.isInvertible()) throw StructuralError("make_comparison_upper: A is singular");
        samples.colwise() = Vector(-lu.solve(ones));
    } else {
        const double rho = *cone.horizon;
        // exact propagator of y' = A y + 1 over a step of length dt
        Matrix aug = Matrix::Zero(m + 1, m + 1);
        aug.topLeftCorner(m, m) = cone.a;
        aug.topRightCorner(m, 1) = ones;
        const Matrix full_step = matrix_exp(aug, step);
        auto propagate = [&](const Vector& y, double dt) {
            const Matrix e = dt == step ? full_step : matrix_exp(aug, dt);
            return Vector(e.topLeftCorner(m, m) * y + e.topRightCorner(m, 1));
        };
        const auto first = static_cast<Eigen::Index>(std::floor(rho / step + kNodeSnap));
        for (Eigen::Index j = nodes_back; j > first; --j) samples.col(j) = ones;
        if (first <= nodes_back) {
            const double partial = rho - static_cast<double>(first) * step;
            Vector y = ones;
            if (partial > kNodeSnap * step) y = propagate(y, partial);
            samples.col(first) = y;
            for (Eigen::Index j = first - 1; j >= 0; --j) {
                y = propagate(y, step);
                samples.col(j) = y;
            }
        } else {
            // grid shorter than the horizon: propagate from -rho to the oldest node first
            Vector y = propagate(ones, rho - static_cast<double>(nodes_back) * step);
            samples.col(nodes_back) = y;
            for (Eigen::Index j = nodes_back - 1; j >= 0; --j) {
                y = propagate(y, step);
                samples.col(j) = y;
            }
        }
    }
    ComparisonFunction out{HistoryGrid(step, samples), samples.minCoeff()};
    return out;
}

}  // namespace nfde
