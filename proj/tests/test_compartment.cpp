#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nfde/compartment.hpp"
#include "nfde/errors.hpp"
#include "support.hpp"

using namespace nfde;
using namespace nfde::testing_support;

namespace {

constexpr double kTwoPi = 6.283185307179586;

Vector scalar(double v) { return Vector::Constant(1, v); }

CheckOptions small_options() {
    CheckOptions o;
    o.sampling.grid_per_dim = 32;
    o.sampling.orbit_points = 64;
    return o;
}

const SubMargin& row(const ConditionReport& rep, const std::string& name, Eigen::Index comp = 0) {
    for (const auto& m : rep.margins) {
        if (m.name == name && m.component == comp) return m;
    }
    throw std::runtime_error("no row " + name);
}

// Two compartments with no transport at all and constant inflow 3.
CompartmentalSystem inflow_only() {
    CompartmentalSystem s{2,
                          {{std::nullopt, std::nullopt}, {std::nullopt, std::nullopt}},
                          {std::nullopt, std::nullopt},
                          {TrigPoly(3.0), TrigPoly(3.0)},
                          {{PipeSpec{}, PipeSpec{}}, {PipeSpec{}, PipeSpec{}}},
                          DOperatorSpec(TorusFlow::golden(), TrigMatrix::identity(2), {})};
    return s;
}

}  // namespace

TEST(Shapes, ValuesAndSlopeBounds) {
    const ShapeFn id = IdentityShape{};
    const ShapeFn bend = SineBendShape{0.5};
    const ShapeFn sat = SaturateShape{};
    EXPECT_EQ(id.value(0.0), 0.0);
    EXPECT_EQ(bend.value(0.0), 0.0);
    EXPECT_EQ(sat.value(0.0), 0.0);
    EXPECT_DOUBLE_EQ(bend.value(1.0), 1.0 + 0.5 * std::sin(1.0));
    EXPECT_DOUBLE_EQ(sat.value(-3.0), -0.75);
    EXPECT_EQ(bend.slope_bounds(), (std::pair{0.5, 1.5}));
    EXPECT_EQ(sat.slope_bounds(), (std::pair{0.0, 1.0}));
    EXPECT_THROW(ShapeFn(SineBendShape{1.0}), StructuralError);
    EXPECT_THROW(ShapeFn(SineBendShape{-0.1}), StructuralError);
}

TEST(Shapes, SlopesStayInsideTheirBounds) {
    std::mt19937_64 rng(1);
    for (const ShapeFn& s : {ShapeFn(IdentityShape{}), ShapeFn(SineBendShape{0.7}), ShapeFn(SaturateShape{})}) {
        const auto [lo, hi] = s.slope_bounds();
        for (int k = 0; k < 200; ++k) {
            const double v = uniform(rng, -20, 20);
            EXPECT_GE(s.slope(v), lo - 1e-15);
            EXPECT_LE(s.slope(v), hi + 1e-15);
            const double d = 1e-6;
            EXPECT_NEAR(s.slope(v), (s.value(v + d) - s.value(v - d)) / (2 * d), 1e-6);
        }
    }
}

TEST(Pipes, Validation) {
    EXPECT_NO_THROW(PipeSpec::delay(2.0).validate());
    EXPECT_THROW((PipeSpec{{{1.0, 0.5}, {2.0, 0.4}}}).validate(), StructuralError);
    EXPECT_THROW((PipeSpec{{{-1.0, 1.0}}}).validate(), StructuralError);
    EXPECT_DOUBLE_EQ((PipeSpec{{{1.0, 0.5}, {3.0, 0.5}}}).max_lag(), 3.0);
}

TEST(VectorField, ConstantHistoryIsAnEquilibrium) {
    const auto sys = scalar_system(TrigPoly(0.3), 1.0, 1.0, TrigPoly(1.7)).to_compartmental();
    const FunctionHistory two(1, [](double) { return scalar(2.0); });
    EXPECT_EQ(eval_F(sys, sys.flow().origin(), two)(0), 0.0);
}

TEST(VectorField, OscillatingGainSpotValue) {
    const TrigPoly k = TrigPoly::cosine({1}, 0.5, 1.0);
    const auto sys = scalar_system(TrigPoly(0.0), 1.0, 1.0, k).to_compartmental();
    const FunctionHistory two(1, [](double) { return scalar(2.0); });
    const double k_now = 1.0 + 0.5 * std::cos(0.0);
    const double k_then = 1.0 + 0.5 * std::cos(kTwoPi * (1.0 - kGoldenFrequency));
    EXPECT_NEAR(eval_F(sys, sys.flow().origin(), two)(0), 2.0 * k_then - 2.0 * k_now, 1e-14);
}

TEST(VectorField, InflowOnly) {
    const auto sys = inflow_only();
    const FunctionHistory any(2, [](double s) { return Vector::Constant(2, s); });
    const Vector f = eval_F(sys, sys.flow().origin(), any);
    EXPECT_EQ(f(0), 3.0);
    EXPECT_EQ(f(1), 3.0);
}

TEST(VectorField, ShortHistoryIsRejected) {
    const auto sys = scalar_system(TrigPoly(0.0), 1.0, 2.0, TrigPoly(1.0)).to_compartmental();
    const auto g = HistoryGrid::constant(0.1, 10, scalar(1.0));
    EXPECT_THROW(eval_F(sys, sys.flow().origin(), g), HorizonTooShort);
    EXPECT_THROW(total_mass(sys, sys.flow().origin(), g), HorizonTooShort);
}

TEST(VectorField, GWithoutNeutralTermIsF) {
    std::mt19937_64 rng(4);
    const auto sys = scalar_system(TrigPoly(0.0), 1.0, 1.0, TrigPoly::sine({1}, 0.3, 1.0), SineBendShape{0.4})
                         .to_compartmental();
    const auto y = random_history(rng, 1, 0.05, 60);
    const auto p = sys.flow().point({0.3});
    EXPECT_EQ(eval_G(sys, p, y, 1e-10)(0), eval_F(sys, p, y)(0));
}

TEST(VectorField, GAtReconstructedEquilibrium) {
    const auto sys = scalar_system(TrigPoly(0.5), 1.0, 1.0, TrigPoly(1.0)).to_compartmental();
    const auto p = sys.flow().origin();
    EXPECT_NEAR(eval_G(sys, p, HistoryGrid::constant(0.05, 200, scalar(1.0)), 1e-10)(0), 0.0, 1e-10);
    EXPECT_EQ(eval_G(sys, p, HistoryGrid::constant(0.05, 200, scalar(0.0)), 1e-10)(0), 0.0);
}

TEST(Mass, ScalarSelfLoopExample) {
    // z0 (1 - c) + k z0 with z0 = 2, c = 0.3, k = 1
    const auto sys = scalar_system(TrigPoly(0.3), 1.0, 1.0, TrigPoly(1.0)).to_compartmental();
    const auto g = HistoryGrid::constant(0.01, 200, scalar(2.0));
    EXPECT_NEAR(total_mass(sys, sys.flow().origin(), g), 3.4, 1e-13);
    EXPECT_EQ(total_mass(sys, sys.flow().origin(), HistoryGrid::constant(0.01, 200, scalar(0.0))), 0.0);
}

TEST(Mass, ZeroLagPipesCarryNothing) {
    const auto sys = scalar_system(TrigPoly(0.3), 1.0, 0.0, TrigPoly(1.0)).to_compartmental();
    std::mt19937_64 rng(9);
    const auto g = random_history(rng, 1, 0.01, 200);
    const auto p = sys.flow().point({0.7});
    EXPECT_NEAR(total_mass(sys, p, g), eval_D(sys.dspec, p, g).sum(), 1e-15);
}

TEST(Mass, LinearInTheHistoryForIdentityShapes) {
    NeutralDiagSystem nd;
    nd.m = 2;
    nd.c = {TrigPoly::sine({1}, 0.1, 0.2), TrigPoly(0.1)};
    nd.alpha = {1.0, 0.5};
    nd.rho = {{1.0, 0.3}, {0.7, 0.5}};
    nd.transports = {{TransportSpec{TrigPoly(1.0), IdentityShape{}}, TransportSpec{TrigPoly::cosine({1}, 0.2, 0.5), IdentityShape{}}},
                     {TransportSpec{TrigPoly(0.4), IdentityShape{}}, std::nullopt}};
    const auto sys = nd.to_compartmental();
    std::mt19937_64 rng(12);
    const auto x = random_history(rng, 2, 0.01, 300);
    const auto y = random_history(rng, 2, 0.01, 300);
    const auto p = sys.flow().point({0.15});
    EXPECT_NEAR(total_mass(sys, p, x + y), total_mass(sys, p, x) + total_mass(sys, p, y), 1e-12);
    EXPECT_NEAR(total_mass(sys, p, 3.0 * x), 3.0 * total_mass(sys, p, x), 1e-12);
}

TEST(Mass, ResidualOfOpenSystem) {
    // inflow 1 and no outflow: M(t) - M(0) = t
    CompartmentalSystem sys = inflow_only();
    sys.inflows = {TrigPoly(1.0), TrigPoly(0.0)};
    MassSeries log;
    log.p0 = sys.flow().origin();
    for (int k = 0; k <= 10; ++k) {
        log.times.push_back(0.5 * k);
        log.z.push_back(Vector::Zero(2));
        log.mass.push_back(4.0 + 0.5 * k);
    }
    for (double r : mass_balance_residual(sys, log)) EXPECT_NEAR(r, 0.0, 1e-14);
}

TEST(Bounds, LipschitzExamples) {
    const auto bend = scalar_system(TrigPoly(0.1), 1.0, 1.0, TrigPoly(2.0), SineBendShape{0.5});
    const auto lb = lipschitz_bounds(bend, bend.flow.origin());
    EXPECT_DOUBLE_EQ(lb.l_minus(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(lb.l_plus(0, 0), 3.0);

    NeutralDiagSystem two;
    two.m = 2;
    two.c = {TrigPoly(0.1), TrigPoly(0.1)};
    two.alpha = {1.0, 1.0};
    two.rho = {{1.0, 1.0}, {1.0, 1.0}};
    two.transports = {{TransportSpec{TrigPoly(0.7), IdentityShape{}}, TransportSpec{TrigPoly(0.2), IdentityShape{}}},
                      {TransportSpec{TrigPoly(0.4), IdentityShape{}}, std::nullopt}};
    const auto l2 = lipschitz_bounds(two, two.flow.origin());
    EXPECT_DOUBLE_EQ(l2.big_l_plus(0), 0.7 + 0.4);
    EXPECT_DOUBLE_EQ(l2.big_l_plus(1), 0.2);

    const auto neg = scalar_system(TrigPoly(0.1), 1.0, 1.0, TrigPoly(-1.0));
    EXPECT_THROW(lipschitz_bounds(neg, neg.flow.origin()), StructuralError);
}

TEST(Bounds, CProductExamples) {
    const auto s1 = s1_system();
    const auto p = s1.flow.origin();
    EXPECT_EQ(c_product(s1, p, 0, 0), 1.0);
    const auto half = scalar_system(TrigPoly(0.5), 1.0, 1.0, TrigPoly(1.0));
    EXPECT_DOUBLE_EQ(c_product(half, p, 0, 3), 0.125);
    const double want = s1.c[0].eval(p) * s1.c[0].eval(s1.flow.advance(p, -1.0));
    EXPECT_DOUBLE_EQ(c_product(s1, p, 0, 2), want);
    EXPECT_NEAR(s1.c[0].eval(p), 0.3, 1e-15);
}

TEST(Bounds, PQConstantCoefficients) {
    const auto sys = scalar_system(TrigPoly(0.3), 1.0, 1.0, TrigPoly(1.0));
    const auto pq = pq_sequence(sys, sys.flow.origin(), 0, -2.0, 6);
    EXPECT_DOUBLE_EQ(pq.q[0], 1.0);
    EXPECT_NEAR(pq.p[1], 0.7, 1e-15);
    EXPECT_NEAR(pq.q[1], std::exp(-2.0) + 0.7, 1e-15);
    for (int n = 1; n <= 6; ++n) EXPECT_NEAR(pq.p[n], 0.7 * std::pow(0.3, n - 1), 1e-15);
}

TEST(Bounds, PQRecursionIsBitExact) {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 50; ++trial) {
        const double alpha = uniform(rng, 0.3, 2.0);
        const auto sys = scalar_system(random_trig(rng, 0.4, 0.2), alpha, alpha * uniform(rng, 0.0, 1.0),
                                       random_trig(rng, 1.0, 0.3), SineBendShape{uniform(rng, 0.0, 0.9)});
        const double a = uniform(rng, -3.0, 0.0);
        const auto p = sys.flow.point({uniform(rng, 0, 1)});
        const auto pq = pq_sequence(sys, p, 0, a, 20);
        const double big_l = lipschitz_bounds(sys, p).big_l_plus(0);
        EXPECT_EQ(pq.q[0], -big_l - a);
        for (int n = 1; n <= 20; ++n) EXPECT_EQ(pq.q[n], pq.q[n - 1] * std::exp(a * alpha) + pq.p[n]);
    }
}

TEST(Conditions, Names) {
    for (auto c : {Condition::G3, Condition::G4, Condition::G5, Condition::G8, Condition::G9}) {
        EXPECT_EQ(condition_from_string(to_string(c)), c);
    }
    EXPECT_THROW(condition_from_string("G7"), DomainError);
}

TEST(Conditions, G3FirstInequalityExample) {
    // (2 - 1) e^-2 - 0.1
    const auto sys = scalar_system(TrigPoly(0.1), 1.0, 2.0, TrigPoly(1.0));
    const auto rep = check_condition(sys, Condition::G3, {-2.0}, small_options());
    EXPECT_NEAR(row(rep, "G3.1").min_margin, std::exp(-2.0) - 0.1, 1e-12);
    EXPECT_NEAR(row(rep, "G3.1").min_margin, 0.03533528, 1e-8);
    EXPECT_TRUE(row(rep, "G3.1").passed);
    EXPECT_NEAR(row(rep, "G3.2").min_margin, 1.0 - 0.01, 1e-12);
    EXPECT_TRUE(rep.passed);

    const auto zero = check_condition(sys, Condition::G3, {0.0}, small_options());
    EXPECT_NEAR(row(zero, "G3.1").min_margin, -1.0 - 0.1, 1e-12);
    EXPECT_FALSE(zero.passed);
}

TEST(Conditions, LagPreconditions) {
    const auto sys = scalar_system(TrigPoly(0.1), 1.0, 1.0, TrigPoly(1.0));
    EXPECT_THROW(check_condition(sys, Condition::G3, {-2.0}, small_options()), StructuralError);
    const auto long_pipe = scalar_system(TrigPoly(0.1), 1.0, 1.5, TrigPoly(1.0));
    EXPECT_THROW(check_condition(long_pipe, Condition::G5, {0.0}, small_options()), StructuralError);
    EXPECT_THROW(check_condition(long_pipe, Condition::G4, {0.0}, small_options()), StructuralError);
    EXPECT_THROW(check_condition(long_pipe, Condition::G9, {0.0}, small_options()), StructuralError);
}

TEST(Conditions, G5MatchesHandFormulaPerSample) {
    const TrigPoly k = TrigPoly::cosine({1}, 0.4, 1.0);
    const TrigPoly c = TrigPoly::sine({2}, 0.1, 0.3);
    const auto sys = scalar_system(c, 1.0, 1.0, k);
    const auto rep = check_condition(sys, Condition::G5, {0.0}, small_options());
    const auto& g5 = row(rep, "G5");
    ASSERT_EQ(g5.values.size(), rep.samples.size());
    for (std::size_t s = 0; s < rep.samples.size(); ++s) {
        const auto& w = rep.samples[s];
        const double want = k.eval(sys.flow.advance(w, -1.0)) - k.eval(w) * c.eval(w);
        EXPECT_NEAR(g5.values[s], want, 1e-12);
    }
}

TEST(Conditions, G5OnTheSelfLoop) {
    const auto s1 = s1_system();
    const auto rep = check_condition(s1, Condition::G5, {0.0}, small_options());
    EXPECT_TRUE(rep.passed);
    EXPECT_GE(row(rep, "G5").min_margin, 0.5 - 1e-12);
    EXPECT_LE(row(rep, "G5").min_margin, 0.5 + 1e-3);
}

TEST(Conditions, G4CertifiesTheSelfLoop) {
    const auto s1 = s1_system();
    const auto rep = check_condition(s1, Condition::G4, {-2.0}, small_options());
    EXPECT_TRUE(rep.passed);
    ASSERT_EQ(rep.components.size(), 1u);
    EXPECT_EQ(rep.components[0].note, "p_n >= 0 certified for all n");
    // q_0 = -L - a = -0.5 < 0 breaks the prefix clause even though q_1 > 0
    EXPECT_FALSE(check_condition(s1, Condition::G4, {-0.5}, small_options()).passed);
}

TEST(Conditions, G4FallsBackWhenNotFactorable) {
    const auto sys = scalar_system(TrigPoly::sine({1}, 0.1, 0.2), 1.0, 0.5, TrigPoly(1.0));
    const auto rep = check_condition(sys, Condition::G4, {-0.5}, small_options());
    EXPECT_NE(rep.components[0].note.find("only"), std::string::npos);
}

TEST(Conditions, G8ConstantCoefficients) {
    // -L - a + min(a c, 0) e^{-a alpha} with gamma = 0
    const auto sys = scalar_system(TrigPoly(0.01), 1.0, 1.0, TrigPoly(1.0));
    const auto rep = check_condition(sys, Condition::G8, {-2.0}, small_options());
    EXPECT_NEAR(row(rep, "G8").min_margin, 1.0 - 0.02 * std::exp(2.0), 1e-12);
    EXPECT_TRUE(rep.passed);
}

TEST(Conditions, VacuousComponent) {
    const auto sys = scalar_system(TrigPoly(0.0), 1.0, 0.0, TrigPoly(1.0));
    const auto rep = check_condition(sys, Condition::G3, {-2.0}, small_options());
    EXPECT_TRUE(rep.components[0].vacuous);
    EXPECT_TRUE(rep.passed);
}

TEST(Conditions, InducedLambdaIsTheLargestC) {
    NeutralDiagSystem nd;
    nd.m = 2;
    nd.c = {TrigPoly::sine({1}, 0.2, 0.3), TrigPoly::cosine({1}, 0.1, 0.5)};
    nd.alpha = {1.0, 1.0};
    nd.rho = {{1.0, 1.0}, {1.0, 1.0}};
    nd.transports = {{TransportSpec{TrigPoly(1.0), IdentityShape{}}, std::nullopt},
                     {std::nullopt, TransportSpec{TrigPoly(1.0), IdentityShape{}}}};
    const auto est = stability_margin(nd.to_compartmental().dspec, OmegaSampling{});
    EXPECT_NEAR(est.lambda, 0.6, 1e-3);
    EXPECT_LE(est.lambda, 0.6);
}

TEST(Suggest, FindsANegativeAForG3) {
    const auto sys = scalar_system(TrigPoly(0.1), 1.0, 2.0, TrigPoly(1.0));
    const auto s = suggest_a(sys, Condition::G3, {0.0, -0.5, -1.0, -2.0, -3.0}, small_options());
    EXPECT_LT(s.a[0], 0.0);
    EXPECT_GT(s.worst_margin[0], 0.0);
}

TEST(Suggest, VacuousComponentGetsTheClassicalChoice) {
    const auto sys = scalar_system(TrigPoly(0.0), 1.0, 0.0, TrigPoly::cosine({1}, 0.5, 1.0));
    const auto s = suggest_a(sys, Condition::G3, {0.0, -1.0}, small_options());
    const auto& trials = s.trials[0];
    EXPECT_NE(std::find(trials.begin(), trials.end(), s.a[0]), trials.end());
    EXPECT_NEAR(s.a[0], -2.5, 1e-12);
}

TEST(Suggest, TiesGoTowardZero) {
    const auto sys = scalar_system(TrigPoly(0.1), 1.0, 2.0, TrigPoly(0.0));
    const auto s = suggest_a(sys, Condition::G3, {0.0, -1.0, -2.0}, small_options());
    EXPECT_EQ(s.a[0], 0.0);
}
