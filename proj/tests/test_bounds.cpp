#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "widthlab/bounds.hpp"
#include "widthlab/discretize.hpp"
#include "widthlab/spectrum.hpp"

using namespace widthlab;

namespace {

NormBudget plain_budget(double R, double R_b, double D_x, double delta = 0.1)
{
    NormBudget b;
    b.R = R;
    b.R_b = R_b;
    b.D_x = D_x;
    b.delta = delta;
    return b;
}

} // namespace

TEST_SUITE("bounds") {

TEST_CASE("regime names round trip") {
    CHECK(regime_name(Regime::tight) == "tight");
    CHECK(regime_name(Regime::loose) == "loose");
    CHECK(parse_regime("tight") == Regime::tight);
    CHECK(parse_regime("loose") == Regime::loose);
    CHECK_THROWS_AS(parse_regime("medium"), std::invalid_argument);
}

TEST_CASE("approximation bound on frozen instances") {
    // depth 2 has a single term 2 R sqrt(lambda_2); the delta factor drops out
    CHECK(delta1(plain_budget(1.5, 0.0, 1.0), 2, {0.04}) ==
          doctest::Approx(0.6).epsilon(1e-14));

    // depth 3 at delta = 0.1: 0.6 sqrt(40/9) + 0.4, computed by hand
    CHECK(delta1(plain_budget(1.0, 0.0, 1.0), 3, {0.09, 0.04}) ==
          doctest::Approx(1.664911064067352).epsilon(1e-13));

    // no internal layers means an empty sum
    CHECK(delta1(plain_budget(1.0, 0.0, 1.0), 1, {}) == 0.0);

    CHECK_THROWS_AS(delta1(plain_budget(1.0, 0.0, 1.0), 2, {}), std::invalid_argument);
    CHECK_THROWS_AS(delta1(plain_budget(1.0, 0.0, 1.0), 2, {0.0}), std::invalid_argument);
    CHECK_THROWS_AS(delta1(plain_budget(1.0, 0.0, 1.0), 0, {}), std::invalid_argument);
}

TEST_CASE("loose approximation bound carries the width factor") {
    const auto b = plain_budget(1.0, 0.0, 1.0);
    // same depth-3 instance with widths {5, 9, 4, 1}: the l = 2 term picks up
    // sqrt(4), the l = 3 term sqrt(1)
    CHECK(delta1_loose(b, 3, {0.09, 0.04}, {5, 9, 4, 1}) ==
          doctest::Approx(2.9298221281347034).epsilon(1e-13));

    // at depth 2 the only factor is the scalar output width, so both bounds
    // coincide identically
    CHECK(delta1_loose(b, 2, {0.09}, {5, 7, 1}) ==
          doctest::Approx(delta1(b, 2, {0.09})).epsilon(1e-14));

    // and the loose variant can never fall below the plain one
    for (int m3 : {1, 2, 8, 32})
        CHECK(delta1_loose(b, 3, {0.09, 0.04}, {5, 9, m3, 1}) >=
              delta1(b, 3, {0.09, 0.04}) - 1e-15);

    CHECK_THROWS_AS(delta1_loose(b, 3, {0.09, 0.04}, {5, 9, 1}), std::invalid_argument);
    CHECK_THROWS_AS(delta1_loose(b, 2, {0.09}, {5, 0, 1}), std::invalid_argument);
}

TEST_CASE("estimation bound on frozen instances") {
    // S = 3*2 + 1*3 = 9; with n = 9 and a small covering argument the
    // log_+ floor engages and the bound collapses to 1
    const auto b = plain_budget(0.0, 1.0, 1.0);
    CHECK(delta2(b, 2, {2, 3, 1}, 9, 3.0, 3.0, 10.0) ==
          doctest::Approx(1.0).epsilon(1e-14));

    // pushing sigma down by a factor 1000 leaves the argument at 1001
    CHECK(delta2(b, 2, {2, 3, 1}, 9, 0.003, 3.0, 10.0) ==
          doctest::Approx(2.628451022810815).epsilon(1e-13));

    // more samples shrink the bound
    CHECK(delta2(b, 2, {2, 3, 1}, 9000, 0.003, 3.0, 10.0) <
          delta2(b, 2, {2, 3, 1}, 9, 0.003, 3.0, 10.0));

    CHECK_THROWS_AS(delta2(b, 2, {2, 3, 1}, 0, 1.0, 3.0, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(delta2(b, 2, {2, 3, 1}, 9, 0.0, 3.0, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(delta2(b, 2, {2, 3}, 9, 1.0, 3.0, 10.0), std::invalid_argument);
    CHECK_THROWS_AS(delta2(b, 2, {2, 3, 1}, 9, 1.0, 3.0, 0.0), std::invalid_argument);
}

TEST_CASE("covering number logarithm") {
    // parameter count (3+1)*2 + (1+1)*3 = 14 and radius term log 4
    const auto b = plain_budget(0.0, 1.0, 1.0);
    CHECK(covering_log(b, 2, {2, 3, 1}, 3.0, 2.0) ==
          doctest::Approx(19.408121055678468).epsilon(1e-13));

    // finer scales cost more
    CHECK(covering_log(b, 2, {2, 3, 1}, 3.0, 0.1) > covering_log(b, 2, {2, 3, 1}, 3.0, 1.0));
    CHECK_THROWS_AS(covering_log(b, 2, {2, 3, 1}, 3.0, 0.0), std::invalid_argument);
}

TEST_CASE("generalization bound bracket on frozen instances") {
    // d1 = 0.1, d2 = 0.2, sigma = 1, sup bound 2, n = 100, r = 1, r_tilde = 1.5:
    // 0.015 + 0.2 + 0.05 (log 20 + 1)
    CHECK(thm2_rhs(0.1, 0.2, 1.0, 2.0, 100, 1.0, 1.5) ==
          doctest::Approx(0.4147866136776996).epsilon(1e-13));

    // appendix weighting (1 + r_tilde) at r_tilde = 1
    CHECK(thm2_rhs(0.1, 0.2, 1.0, 2.0, 100, 1.0, 1.0, true) ==
          doctest::Approx(0.41978661367769954).epsilon(1e-13));

    // noise-dominated case floors the log: tail = 5/4 * (1 + 1)
    CHECK(thm2_rhs(0.0, 0.0, 2.0, 1.0, 4, 1.0, 2.0) ==
          doctest::Approx(2.5).epsilon(1e-14));

    CHECK_THROWS_AS(thm2_rhs(0.1, 0.2, 1.0, 2.0, 100, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(thm2_rhs(0.1, 0.2, 1.0, 2.0, 100, 1.0, 2.5), std::invalid_argument);
    CHECK_THROWS_AS(thm2_rhs(0.1, 0.2, 1.0, 2.0, 100, 1.0, 1.5, true), std::invalid_argument);
    CHECK_THROWS_AS(thm2_rhs(0.1, 0.2, 1.0, 2.0, 100, 0.0, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(thm2_rhs(0.1, 0.2, 1.0, 2.0, 0, 1.0, 1.5), std::invalid_argument);
}

TEST_CASE("success probability expressions") {
    CHECK(prob_bound_main(100, 0.5, 2.0, 3.0) ==
          doctest::Approx(0.7973950598025079).epsilon(1e-13));
    CHECK(prob_bound_appendix(100, 0.5, 1.0, 3.0) ==
          doctest::Approx(0.8044587772192736).epsilon(1e-13));
    // both expressions rise toward 1 as the sample grows
    CHECK(prob_bound_main(10000, 0.5, 2.0, 3.0) > prob_bound_main(100, 0.5, 2.0, 3.0));
    CHECK(prob_bound_appendix(10000, 0.5, 1.0, 3.0) > prob_bound_appendix(100, 0.5, 1.0, 3.0));
    // and degrade to the concentration-free floor when d1 vanishes
    CHECK(prob_bound_main(100, 0.0, 2.0, 3.0) ==
          doctest::Approx(-2.0 * std::exp(-3.0)).epsilon(1e-13));
}

TEST_CASE("regularization choice on frozen instances") {
    CHECK(optimal_lambda(Regime::tight, 1.0, 0.5, 256) == doctest::Approx(0.0625).epsilon(1e-13));
    CHECK(optimal_lambda(Regime::loose, 1.0, 0.5, 256) ==
          doctest::Approx(0.024803141437003122).epsilon(1e-13));
    CHECK(optimal_lambda(Regime::tight, 4.0, 0.5, 16) == doctest::Approx(0.5).epsilon(1e-13));
    CHECK_THROWS_AS(optimal_lambda(Regime::tight, 0.0, 0.5, 16), std::invalid_argument);
    CHECK_THROWS_AS(optimal_lambda(Regime::tight, 1.0, 1.0, 16), std::invalid_argument);
    CHECK_THROWS_AS(optimal_lambda(Regime::tight, 1.0, 0.5, 0), std::invalid_argument);
}

TEST_CASE("the chosen lambda balances the regime's own trade off") {
    // at the optimum the effective dimension satisfies N^2 = n lambda in the
    // tight regime and N = n lambda in the loose one; both follow by algebra
    // from the closed forms and pin them against each other
    for (double a : {0.5, 1.0, 3.0}) {
        for (double s : {0.25, 0.5, 0.75}) {
            for (int n : {64, 1024, 65536}) {
                const double lt = optimal_lambda(Regime::tight, a, s, n);
                const double Nt = dof_from_decay(a, s, lt);
                REQUIRE(Nt * Nt == doctest::Approx(n * lt).epsilon(1e-9));
                const double ll = optimal_lambda(Regime::loose, a, s, n);
                const double Nl = dof_from_decay(a, s, ll);
                REQUIRE(Nl == doctest::Approx(n * ll).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("rate exponents on frozen instances") {
    CHECK(rate_exponent(Regime::tight, 0.5) == doctest::Approx(-0.5).epsilon(1e-13));
    CHECK(rate_exponent(Regime::loose, 0.5) == doctest::Approx(-1.0 / 3.0).epsilon(1e-13));
    CHECK(rate_exponent(Regime::tight, 1.0 / 3.0) ==
          doctest::Approx(-0.6).epsilon(1e-12));
    CHECK(rate_exponent(Regime::loose, 1.0 / 3.0) == doctest::Approx(-0.5).epsilon(1e-13));
    // the tight analysis always predicts at least as fast a decay
    for (double s = 0.05; s < 1.0; s += 0.05)
        REQUIRE(rate_exponent(Regime::tight, s) <= rate_exponent(Regime::loose, s) + 1e-15);
    for (double s : {0.3, 0.5, 0.8})
        REQUIRE(rate_exponent(Regime::tight, s) < rate_exponent(Regime::loose, s));
    CHECK_THROWS_AS(rate_exponent(Regime::tight, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(rate_exponent(Regime::tight, 1.0), std::invalid_argument);
}

TEST_CASE("width plans size layers by the dof rule") {
    const double delta = 0.1;
    for (auto regime : {Regime::tight, Regime::loose}) {
        const auto plan = plan_widths({{1.0, 0.5}, {2.0, 0.25}}, 1024, delta, regime);
        REQUIRE(plan.lambda.size() == 2);
        REQUIRE(plan.m.size() == 2);
        CHECK(plan.regime == regime);
        CHECK(plan.decays.size() == 2);
        for (std::size_t i = 0; i < 2; ++i) {
            const auto [a, s] = plan.decays[i];
            CHECK(plan.lambda[i] == doctest::Approx(optimal_lambda(regime, a, s, 1024)));
            // at the balanced lambda the sampling-consistency floor never
            // exceeds the dof width rule, so the rule decides alone
            CHECK(plan.m[i] == min_width(dof_from_decay(a, s, plan.lambda[i]), delta));
        }
    }
    const auto tight = plan_widths({{1.0, 0.5}, {1.0, 0.25}}, 1024, delta, Regime::tight);
    CHECK(tight.predicted_rate_exponent == doctest::Approx(-0.5).epsilon(1e-13));
}

TEST_CASE("width plans grow with n and the loose regime asks for more nodes") {
    int prev_m = 0;
    double prev_lam = 1e9;
    for (int n : {64, 256, 1024, 4096}) {
        const auto t = plan_widths({{1.0, 0.5}}, n, 0.1, Regime::tight);
        REQUIRE(t.m[0] >= prev_m);
        REQUIRE(t.lambda[0] < prev_lam);
        prev_m = t.m[0];
        prev_lam = t.lambda[0];
        const auto l = plan_widths({{1.0, 0.5}}, n, 0.1, Regime::loose);
        REQUIRE(l.m[0] >= t.m[0]);
    }
    CHECK_THROWS_AS(plan_widths({}, 100, 0.1, Regime::tight), std::invalid_argument);
    CHECK_THROWS_AS(plan_widths({{1.0, 0.5}}, 1, 0.1, Regime::tight), std::invalid_argument);
}

TEST_CASE("width plan serialization carries every layer") {
    const auto plan = plan_widths({{1.0, 0.5}, {2.0, 0.3}}, 512, 0.1, Regime::loose);
    const auto j = nlohmann::json::parse(width_plan_to_json(plan, 512, 0.1));
    CHECK(j.at("regime") == "loose");
    CHECK(j.at("n") == 512);
    REQUIRE(j.at("layers").size() == 2);
    CHECK(j.at("layers")[0].at("layer") == 2);
    CHECK(j.at("layers")[1].at("m") == plan.m[1]);
    CHECK(j.at("layers")[0].at("lambda").get<double>() ==
          doctest::Approx(plan.lambda[0]).epsilon(1e-15));
}

TEST_CASE("bound reports compose the pieces consistently") {
    const auto b = plain_budget(0.6, 0.4, 1.0);
    const auto act = Activation::parse("relu", 0.0);
    const std::vector<int> widths{3, 8, 1};
    const std::vector<double> lambdas{0.01};
    const auto rep = make_bound_report(b, act, widths, lambdas, 200, 0.3, 1.0, 1.5,
                                       {0.1, 0.5});
    CHECK(rep.L == 2);
    CHECK(rep.delta1 == doctest::Approx(delta1(b, 2, lambdas)).epsilon(1e-14));
    CHECK(rep.delta1_loose ==
          doctest::Approx(delta1_loose(b, 2, lambdas, widths)).epsilon(1e-14));
    CHECK(rep.delta2 ==
          doctest::Approx(delta2(b, 2, widths, 200, 0.3, rep.g_hat, rep.r_hat_inf))
              .epsilon(1e-14));
    CHECK(rep.thm2 ==
          doctest::Approx(thm2_rhs(rep.delta1, rep.delta2, 0.3, rep.r_hat_inf, 200, 1.0, 1.5))
              .epsilon(1e-14));
    REQUIRE(rep.covering.size() == 2);
    CHECK(rep.covering[0].first == 0.1);
    CHECK(rep.covering[0].second ==
          doctest::Approx(covering_log(b, 2, widths, rep.g_hat, 0.1)).epsilon(1e-14));

    const auto j = nlohmann::json::parse(bound_report_to_json(rep));
    CHECK(j.at("delta1").get<double>() == doctest::Approx(rep.delta1).epsilon(1e-15));
    CHECK(j.at("covering").size() == 2);
    CHECK(j.at("inputs").at("n") == 200);
}

TEST_CASE("report sensitivity constant matches the depth-1 hand value") {
    // R_bar = 1, R_b = 1, D_x = 1, relu, one layer: 1 (1 + 0 + 1) + 1 = 3
    NormBudget b;
    b.delta = 0.1;
    b.R_b = 1.0;
    b.D_x = 1.0;
    b.R = 1.0 / std::sqrt(b.c_hat());
    const auto rep = make_bound_report(b, Activation::parse("relu", 0.0), {1, 1}, {}, 50, 0.5,
                                       1.0, 1.5, {});
    CHECK(rep.g_hat == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(rep.delta1 == 0.0);
}

} // TEST_SUITE
