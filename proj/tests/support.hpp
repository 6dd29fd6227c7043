#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "nfde/compartment.hpp"
#include "nfde/d_operator.hpp"
#include "nfde/history.hpp"
#include "nfde/ordering.hpp"

namespace nfde::testing_support {

// Scalar closed self-loop: k == 1, c = 0.3 + 0.2 sin(2 pi theta), alpha = rho = 1.
inline NeutralDiagSystem s1_system() {
    NeutralDiagSystem s;
    s.m = 1;
    s.flow = TorusFlow::golden();
    s.c = {TrigPoly::sine({1}, 0.2, 0.3)};
    s.alpha = {1.0};
    s.rho = {{1.0}};
    s.transports = {{TransportSpec{TrigPoly(1.0), IdentityShape{}}}};
    return s;
}

inline NeutralDiagSystem scalar_system(TrigPoly c, double alpha, double rho, TrigPoly gain,
                                       ShapeFn shape = IdentityShape{}) {
    NeutralDiagSystem s;
    s.m = 1;
    s.c = {std::move(c)};
    s.alpha = {alpha};
    s.rho = {{rho}};
    s.transports = {{TransportSpec{std::move(gain), shape}}};
    return s;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

/// c + a cos(2 pi k theta) + b sin(2 pi k theta) on the one-torus, with a random low mode.
inline TrigPoly random_trig(std::mt19937_64& rng, double constant, double amp) {
    const int k = uniform_int(rng, 1, 3);
    return TrigPoly(constant, {TrigTerm{{k}, uniform(rng, -amp, amp), uniform(rng, -amp, amp)}});
}

/// Sum of a few random sines sampled on a grid.
inline HistoryGrid random_history(std::mt19937_64& rng, Eigen::Index m, double step, Eigen::Index nodes,
                                  double offset = 0.0) {
    Matrix a(m, 3), f(m, 3), ph(m, 3);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (int k = 0; k < 3; ++k) {
            a(i, k) = uniform(rng, -1.0, 1.0);
            f(i, k) = uniform(rng, 0.05, 0.8);
            ph(i, k) = uniform(rng, 0.0, 6.283185307179586);
        }
    }
    return HistoryGrid::from_function(step, nodes, [=](double s) {
        Vector v = Vector::Constant(m, offset);
        for (Eigen::Index i = 0; i < m; ++i) {
            for (int k = 0; k < 3; ++k) v(i) += a(i, k) * std::sin(6.283185307179586 * f(i, k) * s + ph(i, k));
        }
        return v;
    });
}

/// Random D operator on the golden flow: B near the identity, up to three atoms
/// at lags that are multiples of `step`, weights rescaled so the sampled
/// contraction factor equals `lambda`. With `positive` set, B is a positive
/// diagonal and every weight entry is nonnegative.
inline DOperatorSpec random_dspec(std::mt19937_64& rng, Eigen::Index m, double lambda, double step,
                                  bool positive = false) {
    const auto flow = TorusFlow::golden();
    TrigMatrix b(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            if (i == j) {
                b(i, j) = random_trig(rng, 1.0, 0.1);
            } else if (!positive) {
                b(i, j) = random_trig(rng, 0.0, 0.05);
            }
        }
    }
    const int n_atoms = uniform_int(rng, 1, 3);
    std::vector<int> lag_steps;
    while (static_cast<int>(lag_steps.size()) < n_atoms) {
        const int k = uniform_int(rng, std::max(1, static_cast<int>(0.2 / step)), static_cast<int>(2.0 / step));
        if (std::find(lag_steps.begin(), lag_steps.end(), k) == lag_steps.end()) lag_steps.push_back(k);
    }
    AtomicMeasureFamily nu;
    for (int k : lag_steps) {
        TrigMatrix w(m, m);
        for (Eigen::Index i = 0; i < m; ++i) {
            for (Eigen::Index j = 0; j < m; ++j) {
                const double c = positive ? uniform(rng, 0.0, 1.0) : uniform(rng, -1.0, 1.0);
                w(i, j) = random_trig(rng, c, positive ? 0.5 * c : 0.5);
            }
        }
        nu.atoms.push_back({static_cast<double>(k) * step, w});
    }
    const DOperatorSpec raw(flow, b, nu);
    OmegaSampling coarse;
    coarse.grid_per_dim = 64;
    coarse.orbit_points = 64;
    double lam = 0.0;
    for (const auto& x : sample_points(flow, coarse)) lam = std::max(lam, point_norms(raw, x).lambda);
    for (auto& a : nu.atoms) {
        for (Eigen::Index i = 0; i < m; ++i) {
            for (Eigen::Index j = 0; j < m; ++j) a.weight(i, j) = a.weight(i, j).scaled(lambda / lam);
        }
    }
    return DOperatorSpec(flow, b, nu);
}

/// Random quasipositive A; diagonal in [-2, 0.5], off-diagonal in [0, 0.5]
/// with about a third of them zero.
inline Matrix random_quasipositive(std::mt19937_64& rng, Eigen::Index m) {
    Matrix a(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            if (i == j) {
                a(i, j) = uniform(rng, -2.0, 0.5);
            } else {
                a(i, j) = uniform(rng, 0.0, 1.0) < 0.33 ? 0.0 : uniform(rng, 0.0, 0.5);
            }
        }
    }
    return a;
}

/// Differences v built backward from the oldest node by v_j = e^{Ah} v_{j+1} + d_j.
/// Most increments are clearly positive; with probability `bad` an increment
/// is clearly negative, so the slacks never sit near the tolerance.
inline HistoryGrid random_cone_history(std::mt19937_64& rng, const Matrix& a, double h, Eigen::Index nodes,
                                       double bad) {
    const Eigen::Index m = a.rows();
    const Matrix e = (a * h).exp();
    Matrix v(m, nodes + 1);
    for (Eigen::Index i = 0; i < m; ++i) v(i, nodes) = uniform(rng, 0.01, 1.0);
    for (Eigen::Index j = nodes - 1; j >= 0; --j) {
        Vector d(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            d(i) = uniform(rng, 0.0, 1.0) < bad ? uniform(rng, -0.2, -1e-3) : uniform(rng, 1e-6, 0.1);
        }
        v.col(j) = e * v.col(j + 1) + d;
    }
    return HistoryGrid(h, v);
}

/// O(J^2) membership check: signs at every node and the exponential
/// inequality for every pair of nodes inside [-rho, 0]. Pairwise propagators
/// come from Eigen's matrix exponential, not from the library.
inline bool brute_force_ordered(const HistoryGrid& v, const Matrix& a, std::optional<double> rho, double tol) {
    const Eigen::Index last = v.last_index();
    const double h = v.step();
    if (v.samples().minCoeff() < -tol) return false;
    Eigen::Index in_window = last;
    if (rho) in_window = std::min<Eigen::Index>(last, static_cast<Eigen::Index>(std::floor(*rho / h + 1e-9)));
    std::vector<Matrix> prop(static_cast<std::size_t>(in_window) + 1);
    for (Eigen::Index k = 0; k <= in_window; ++k) prop[static_cast<std::size_t>(k)] = (a * (h * static_cast<double>(k))).exp();
    for (Eigen::Index t = 0; t <= in_window; ++t) {
        for (Eigen::Index s = t + 1; s <= in_window; ++s) {
            const Vector slack = v.samples().col(t) - prop[static_cast<std::size_t>(s - t)] * v.samples().col(s);
            if (slack.minCoeff() < -tol) return false;
        }
    }
    return true;
}

}  // namespace nfde::testing_support
