#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qconv/ansatz.hpp"
#include "qconv/error.hpp"
#include "qconv/grad.hpp"
#include "testkit.hpp"

using namespace qconv;

namespace {

constexpr double kPi = std::numbers::pi;

CircuitSpec controlled_rotation_circuit() {
    return CircuitSpec(2,
                       {{GateKind::RxData, 0, std::nullopt, 0},
                        {GateKind::RxData, 1, std::nullopt, 1},
                        {GateKind::CXPow, 1, 0, 0}},
                       1, {1});
}

// The textbook two-point rule applied to every parameter regardless of gate.
std::vector<double> naive_two_point(const CircuitSpec &c, std::vector<double> p, std::span<const double> angles) {
    std::vector<double> g(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double keep = p[i];
        p[i] = keep + 0.5;
        const double up = circuit_expectation(c, p, angles);
        p[i] = keep - 0.5;
        const double down = circuit_expectation(c, p, angles);
        p[i] = keep;
        g[i] = kPi / 2 * (up - down);
    }
    return g;
}

} // namespace

TEST(ShiftRule, NoParametersGivesEmptyGradient) {
    CircuitSpec c(2, {{GateKind::RxData, 0, std::nullopt, 0}}, 0, {0, 1});
    const std::vector<double> angles{0.4};
    EXPECT_TRUE(shift_rule_gradient(c, {}, angles).empty());
}

TEST(ShiftRule, ControlledRotationAtZero) {
    const auto c = controlled_rotation_circuit();
    const std::vector<double> angles{kPi, kPi / 2};
    const std::vector<double> p{0.0};
    EXPECT_NEAR(circuit_expectation(c, p, angles), 0.0, 1e-15); // -sin(0)
    const auto g = shift_rule_gradient(c, p, angles);
    ASSERT_EQ(g.size(), 1u);
    EXPECT_NEAR(g[0], -kPi, 1e-12);
}

TEST(ShiftRule, ArityMismatch) {
    const auto c = controlled_rotation_circuit();
    const std::vector<double> angles{kPi, kPi / 2};
    const std::vector<double> p{0.0, 1.0};
    try {
        shift_rule_gradient(c, p, angles);
        FAIL();
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::Arity);
    }
}

TEST(ShiftRule, EquidistantTermsReduceToTwoPointRule) {
    const auto terms = equidistant_shift_terms(1, kPi);
    ASSERT_EQ(terms.size(), 2u);
    EXPECT_NEAR(terms[0].shift, 0.5, 1e-15);
    EXPECT_NEAR(terms[0].coefficient, kPi / 2, 1e-14);
    EXPECT_NEAR(terms[1].shift, 1.5, 1e-15); // == -0.5 modulo the period 2
    EXPECT_NEAR(terms[1].coefficient, -kPi / 2, 1e-14);
}

TEST(ShiftRule, EquidistantTermsDifferentiateTrigPolynomials) {
    // f(x) = sum_k a_k cos(k w x) + b_k sin(k w x), k = 1..3
    const double w = kPi / 2;
    const double a[] = {0.3, -0.7, 0.2};
    const double b[] = {-0.1, 0.5, 0.9};
    auto f = [&](double x) {
        double s = 0.25;
        for (int k = 1; k <= 3; ++k) {
            s += a[k - 1] * std::cos(k * w * x) + b[k - 1] * std::sin(k * w * x);
        }
        return s;
    };
    auto df = [&](double x) {
        double s = 0.0;
        for (int k = 1; k <= 3; ++k) {
            s += k * w * (-a[k - 1] * std::sin(k * w * x) + b[k - 1] * std::cos(k * w * x));
        }
        return s;
    };
    const auto terms = equidistant_shift_terms(3, w);
    for (double x : {-1.3, 0.0, 0.4, 2.2}) {
        double g = 0.0;
        for (const auto &t : terms) {
            g += t.coefficient * f(x + t.shift);
        }
        EXPECT_NEAR(g, df(x), 1e-12);
    }
}

TEST(ShiftRule, TwoPointRuleIsInexactWhenControlIsLaterRotated) {
    // HQconv over 2 channels: the within-channel CXPow controlled by pixel 1
    // of channel 2 is followed by the cross-channel CXPow targeting that qubit.
    const auto c = build_hqconv({1, 2, 2}, 1);
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    std::vector<double> p(c.num_params());
    for (auto &x : p) {
        x = d(rng);
    }
    const std::vector<double> angles{0.3, 1.9, 2.4, 0.7};
    const auto fd = finite_difference_gradient(c, p, angles, 1e-5);
    const auto naive = naive_two_point(c, p, angles);
    const auto exact = shift_rule_gradient(c, p, angles);

    // param 3 is the CXPow of pair (q2 -> q3); q2 is later targeted by (q0 -> q2).
    EXPECT_EQ(shift_terms_for(c, 3).size(), 6u);
    EXPECT_EQ(shift_terms_for(c, 2).size(), 2u);
    EXPECT_GT(std::abs(naive[3] - fd[3]), 1e-3);
    for (std::size_t i = 0; i < p.size(); ++i) {
        EXPECT_TRUE(testkit::close_rel(exact[i], fd[i], 1e-6, 1e-8)) << i << ": " << exact[i] << " vs " << fd[i];
    }
}

TEST(ShiftRule, FQconvUsesOnlyTwoPointTerms) {
    const auto c = build_fqconv({2, 2, 3}, 4);
    for (std::size_t i = 0; i < c.num_params(); ++i) {
        EXPECT_EQ(shift_terms_for(c, i).size(), 2u);
    }
}

TEST(FiniteDifference, RejectsBadStep) {
    const auto c = controlled_rotation_circuit();
    const std::vector<double> angles{kPi, kPi / 2};
    const std::vector<double> p{0.0};
    for (double h : {0.0, -1e-3, 0.2}) {
        try {
            finite_difference_gradient(c, p, angles, h);
            FAIL() << h;
        } catch (const Error &e) {
            EXPECT_EQ(e.kind(), ErrorKind::Step);
        }
    }
}

TEST(FiniteDifference, ConstantExpectationGivesZeros) {
    // The trainable gates only touch q1/q2; the observable is q0.
    CircuitSpec c(3,
                  {{GateKind::RxData, 0, std::nullopt, 0},
                   {GateKind::RxData, 1, std::nullopt, 1},
                   {GateKind::CZPow, 2, 1, 0},
                   {GateKind::CXPow, 2, 1, 1}},
                  2, {0});
    const std::vector<double> p{0.3, -0.6};
    const std::vector<double> angles{1.0, 2.0};
    for (double g : finite_difference_gradient(c, p, angles, 1e-4)) {
        EXPECT_NEAR(g, 0.0, 1e-9);
    }
    for (double g : shift_rule_gradient(c, p, angles)) {
        EXPECT_NEAR(g, 0.0, 1e-10);
    }
}

TEST(FiniteDifference, ControlledRotationAtZero) {
    const auto c = controlled_rotation_circuit();
    const std::vector<double> angles{kPi, kPi / 2};
    const std::vector<double> p{0.0};
    EXPECT_NEAR(finite_difference_gradient(c, p, angles, 1e-4)[0], -kPi, 1e-6);
}

TEST(GradProperties, ShiftRuleMatchesFiniteDifferencesOnRandomCircuits) {
    std::mt19937_64 rng(31337);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 4 + rng() % 5;
        auto rc = testkit::random_circuit(rng, n, 12 + rng() % 10);
        const auto exact = shift_rule_gradient(rc.circuit, rc.params, rc.data_angles);
        const auto fd = finite_difference_gradient(rc.circuit, rc.params, rc.data_angles, 1e-5);
        EXPECT_LE(testkit::worst_rel_error(exact, fd, 1e-8), 1e-6) << "trial " << trial;
    }
}

TEST(GradProperties, ShiftRuleMatchesFiniteDifferencesOnAnsaetze) {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        auto rc = testkit::random_ansatz(rng, 4, 8);
        const auto exact = shift_rule_gradient(rc.circuit, rc.params, rc.data_angles);
        const auto fd = finite_difference_gradient(rc.circuit, rc.params, rc.data_angles, 1e-5);
        EXPECT_LE(testkit::worst_rel_error(exact, fd, 1e-8), 1e-6) << "trial " << trial;
    }
}

TEST(GradProperties, OutsideLightConeIsZero) {
    // Gate on q2/q3 after everything else; observable on q0 only.
    CircuitSpec c(4,
                  {{GateKind::RxData, 0, std::nullopt, 0},
                   {GateKind::RxData, 2, std::nullopt, 1},
                   {GateKind::CXPow, 0, 1, 0},
                   {GateKind::CXPow, 3, 2, 1}},
                  2, {0});
    const std::vector<double> p{0.4, 0.9};
    const std::vector<double> angles{0.8, 2.1};
    const auto g = shift_rule_gradient(c, p, angles);
    EXPECT_NEAR(g[1], 0.0, 1e-10);
}

TEST(GradProperties, LinearInTheEvaluator) {
    std::mt19937_64 rng(4);
    auto rc = testkit::random_ansatz(rng, 4, 6);
    auto base = [&](std::span<const double> p) { return circuit_expectation(rc.circuit, p, rc.data_angles); };
    const auto g1 = shift_rule_gradient(rc.circuit, rc.params, base);
    const auto g3 = shift_rule_gradient(rc.circuit, rc.params,
                                        [&](std::span<const double> p) { return -2.5 * base(p); });
    for (std::size_t i = 0; i < g1.size(); ++i) {
        EXPECT_NEAR(g3[i], -2.5 * g1[i], 1e-12);
    }
}

TEST(GradProperties, RejectsNonFiniteParams) {
    const auto c = controlled_rotation_circuit();
    const std::vector<double> angles{kPi, kPi / 2};
    const std::vector<double> p{std::nan("")};
    EXPECT_THROW(shift_rule_gradient(c, p, angles), Error);
}
