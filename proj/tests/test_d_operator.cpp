#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nfde/d_operator.hpp"
#include "nfde/errors.hpp"
#include "support.hpp"

using namespace nfde;
using namespace nfde::testing_support;

namespace {

DOperatorSpec scalar_spec(TrigPoly c, double lag, TrigPoly b = TrigPoly(1.0)) {
    AtomicMeasureFamily nu;
    nu.atoms.push_back({lag, TrigMatrix::diagonal({std::move(c)})});
    return DOperatorSpec(TorusFlow::golden(), TrigMatrix::diagonal({std::move(b)}), nu);
}

Vector scalar(double v) { return Vector::Constant(1, v); }

OmegaSampling small_sampling() {
    OmegaSampling s;
    s.grid_per_dim = 32;
    s.orbit_points = 32;
    return s;
}

// Direct solve of the grid fixed point x_j = B^-1 (yhat_j + sum W x_{j + l}),
// nodes past the grid read x_J. Lags must be multiples of the step. The
// oldest node solves (B - sum W) x_J = yhat_J, the rest follows by recursion.
Matrix direct_inverse(const DOperatorSpec& spec, const TorusPoint& p, const HistoryGrid& yhat) {
    const Eigen::Index J = yhat.last_index();
    const double h = yhat.step();
    Matrix x(yhat.dim(), J + 1);
    for (Eigen::Index j = J; j >= 0; --j) {
        const auto at = spec.flow().advance(p, -static_cast<double>(j) * h);
        const Matrix b = spec.b().eval(at);
        Matrix lhs = b;
        Vector rhs = yhat.node(j);
        for (const auto& a : spec.nu().atoms) {
            const Eigen::Index k = j + static_cast<Eigen::Index>(std::lround(a.lag / h));
            if (k > J && j == J) {
                lhs -= a.weight.eval(at);
                continue;
            }
            rhs += a.weight.eval(at) * x.col(std::min(k, J));
        }
        x.col(j) = lhs.fullPivLu().solve(rhs);
    }
    return x;
}

}  // namespace

TEST(DOperator, EvalDOnLinearHistory) {
    // B = 1, atom 0.5 at lag 1, x(s) = s: D = 0 - 0.5 * (-1)
    const auto spec = scalar_spec(TrigPoly(0.5), 1.0);
    const FunctionHistory x(1, [](double s) { return scalar(s); });
    EXPECT_NEAR(eval_D(spec, spec.flow().origin(), x)(0), 0.5, 1e-15);
}

TEST(DOperator, EvalDWithDensity) {
    // constant density 0.25 on [-2, 0) and x == 1: D = B - 0.5
    AtomicMeasureFamily nu;
    nu.density = MeasureDensity{0.5, std::vector<TrigMatrix>(4, TrigMatrix::diagonal({TrigPoly(0.25)}))};
    const DOperatorSpec spec(TorusFlow::golden(), TrigMatrix::identity(1), nu);
    const FunctionHistory one(1, [](double) { return scalar(1.0); });
    EXPECT_NEAR(eval_D(spec, spec.flow().origin(), one)(0), 0.5, 1e-15);
    EXPECT_DOUBLE_EQ(spec.nu().support(), 2.0);
}

TEST(DOperator, SpecValidation) {
    AtomicMeasureFamily at_zero;
    at_zero.atoms.push_back({0.0, TrigMatrix::identity(1)});
    EXPECT_THROW(DOperatorSpec(TorusFlow::golden(), TrigMatrix::identity(1), at_zero), StructuralError);
    AtomicMeasureFamily wrong;
    wrong.atoms.push_back({1.0, TrigMatrix::identity(2)});
    EXPECT_THROW(DOperatorSpec(TorusFlow::golden(), TrigMatrix::identity(1), wrong), DimensionMismatch);
}

TEST(DOperator, ScalarDiagonalDetection) {
    EXPECT_TRUE(scalar_spec(TrigPoly(0.5), 1.0).is_scalar_diagonal());
    EXPECT_FALSE(scalar_spec(TrigPoly(0.5), 1.0, TrigPoly(2.0)).is_scalar_diagonal());
}

TEST(DOperator, StabilityMarginOfConstantAtom) {
    const auto est = stability_margin(scalar_spec(TrigPoly(0.5), 1.0), small_sampling());
    EXPECT_DOUBLE_EQ(est.lambda, 0.5);
    EXPECT_DOUBLE_EQ(est.k_bound, 2.0);
}

TEST(DOperator, StabilityMarginTracksOscillation) {
    const auto est = stability_margin(scalar_spec(TrigPoly::sine({1}, 0.2, 0.3), 1.0), small_sampling());
    EXPECT_LE(est.lambda, 0.5);
    EXPECT_GT(est.lambda, 0.499);
}

TEST(DOperator, UnstableWeightIsReported) {
    try {
        stability_margin(scalar_spec(TrigPoly(1.2), 1.0), small_sampling());
        FAIL() << "expected UnstableMargin";
    } catch (const UnstableMargin& e) {
        EXPECT_DOUBLE_EQ(e.lambda(), 1.2);
    }
}

TEST(DOperator, SingularBIsReported) {
    const auto spec = scalar_spec(TrigPoly(0.5), 1.0, TrigPoly::cosine({1}, 1.0));
    EXPECT_THROW(stability_margin(spec, small_sampling()), SingularB);
}

TEST(DOperator, PositivityOfNonnegativeSpec) {
    std::mt19937_64 rng(4);
    const auto pos = random_dspec(rng, 2, 0.6, 0.05, true);
    EXPECT_TRUE(check_positivity(pos, small_sampling()).holds());
    const auto neg = scalar_spec(TrigPoly(-0.5), 1.0);
    const auto rep = check_positivity(neg, small_sampling());
    EXPECT_FALSE(rep.holds());
    EXPECT_DOUBLE_EQ(rep.min_binv_nu, -0.5);
}

TEST(DOperator, ScalarGeometricSeries) {
    const auto spec = scalar_spec(TrigPoly(0.5), 1.0);
    const auto p = spec.flow().origin();
    const auto ones = HistoryGrid::constant(0.05, 200, scalar(1.0));
    const auto x = invert_Dhat(spec, p, ones, 1e-10);
    EXPECT_LT((x.samples().array() - 2.0).abs().maxCoeff(), 1e-8);

    // yhat(s) = s gives sum_n 0.5^n (s - n) = 2 s - 2
    const auto ramp = HistoryGrid::from_function(0.05, 1600, [](double s) { return scalar(s); });
    const auto xr = invert_Dhat(spec, p, ramp, 1e-10);
    for (Eigen::Index j = 0; j <= 100; ++j) {
        const double s = -0.05 * static_cast<double>(j);
        EXPECT_NEAR(xr.node(j)(0), 2.0 * s - 2.0, 1e-7) << "s = " << s;
    }
}

TEST(DOperator, TruncationUsesTheGeometricTail) {
    const auto spec = scalar_spec(TrigPoly(0.5), 1.0);
    const auto ones = HistoryGrid::constant(0.1, 50, scalar(1.0));
    const auto r = invert_Dhat_detailed(spec, spec.flow().origin(), ones, 1e-8);
    // smallest N with 2 * 0.5^(N+1) <= 1e-8
    EXPECT_EQ(r.terms, 27);
    EXPECT_LE(r.tail_bound, 1e-8);
    EXPECT_DOUBLE_EQ(r.lambda_used, 0.5);
}

TEST(DOperator, InverseMatchesDirectSolve) {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index m = uniform_int(rng, 1, 3);
        const auto spec = random_dspec(rng, m, 0.7, 0.05);
        const auto p = spec.flow().point({uniform(rng, 0, 1)});
        const auto yhat = random_history(rng, m, 0.05, 120);
        const auto x = invert_Dhat(spec, p, yhat, 1e-11);
        const Matrix want = direct_inverse(spec, p, yhat);
        EXPECT_LT((x.samples() - want).cwiseAbs().maxCoeff(), 1e-9) << "trial " << trial;
    }
}

TEST(DOperator, PartialSumsConverge) {
    std::mt19937_64 rng(7);
    const auto spec = random_dspec(rng, 2, 0.5, 0.05);
    const auto p = spec.flow().origin();
    const auto yhat = random_history(rng, 2, 0.05, 80);
    const Matrix want = direct_inverse(spec, p, yhat);
    double prev = std::numeric_limits<double>::infinity();
    for (int n : {0, 5, 10, 20}) {
        const double err = (neumann_partial_sum(spec, p, yhat, n).samples() - want).cwiseAbs().maxCoeff();
        EXPECT_LT(err, prev);
        prev = err;
    }
    EXPECT_EQ((neumann_partial_sum(spec, p, yhat, 0).samples() - want).size(), want.size());
}

TEST(DOperator, RoundTripAndBound) {
    std::mt19937_64 rng(123);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index m = uniform_int(rng, 1, 3);
        const auto spec = random_dspec(rng, m, 0.7, 0.05);
        const auto est = stability_margin(spec, small_sampling());
        const auto p = spec.flow().point({uniform(rng, 0, 1)});
        const auto yhat = random_history(rng, m, 0.05, 100);
        const auto x = invert_Dhat(spec, p, yhat, 1e-8, &est);
        const auto back = eval_Dhat_segment(spec, p, x);
        EXPECT_LE(sup_norm(back - yhat), 1e-8 + 1e-9);
        EXPECT_LE(sup_norm(x), est.k_bound * sup_norm(yhat) + 1e-8);
    }
}

TEST(DOperator, DstarIsTheRecentNode) {
    const auto spec = scalar_spec(TrigPoly(0.5), 1.0);
    const auto ones = HistoryGrid::constant(0.1, 50, scalar(3.0));
    EXPECT_NEAR(dstar_eval(spec, spec.flow().origin(), ones, 1e-10)(0), 6.0, 1e-9);
}

TEST(DOperator, ProbeFunction) {
    EXPECT_EQ(probe_phi(0.25, 0.0), 1.0);
    EXPECT_EQ(probe_phi(0.25, -0.25), 1.0);
    EXPECT_DOUBLE_EQ(probe_phi(0.25, -0.375), 0.5);
    EXPECT_EQ(probe_phi(0.25, -0.5), 0.0);
    EXPECT_EQ(probe_phi(0.25, -3.0), 0.0);
}

TEST(DOperator, AtomExtractionRecoversB) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::Index m = uniform_int(rng, 1, 3);
        const auto spec = random_dspec(rng, m, 0.7, 0.5);  // lags >= 0.5 > 2 * 0.2
        const auto p = spec.flow().point({uniform(rng, 0, 1)});
        const Matrix got = extract_atom_at_zero(spec, p, 0.2);
        EXPECT_LT((got - spec.b().eval(p)).cwiseAbs().maxCoeff(), 1e-12);
    }
}
