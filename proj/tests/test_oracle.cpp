#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bidask/oracle.hpp"
#include "bidask/report.hpp"
#include "support.hpp"

using namespace bidask;
using testsup::Rng;
using Q = Rational;

TEST_CASE("simplex on small programs") {
    // min x subject to x >= 3
    LinearProgram<Q> lp;
    int x = lp.add_var(true);
    lp.add_constraint({{x, Q(1)}}, +1, Q(3));
    lp.set_objective({{x, Q(1)}}, true);
    auto res = lp.solve();
    REQUIRE(res.status == LPStatus::Optimal);
    CHECK(res.value == Q(3));
    CHECK(res.x[x] == Q(3));

    // max x + y subject to x + 2y <= 4, 3x + y <= 6 (optimum at (8/5, 6/5))
    LinearProgram<Q> lp2;
    int a = lp2.add_var(true), b = lp2.add_var(true);
    lp2.add_constraint({{a, Q(1)}, {b, Q(2)}}, -1, Q(4));
    lp2.add_constraint({{a, Q(3)}, {b, Q(1)}}, -1, Q(6));
    lp2.set_objective({{a, Q(1)}, {b, Q(1)}}, false);
    auto res2 = lp2.solve();
    REQUIRE(res2.status == LPStatus::Optimal);
    CHECK(res2.value == Q(14, 5));

    // infeasible
    LinearProgram<Q> lp3;
    int c = lp3.add_var(true);
    lp3.add_constraint({{c, Q(1)}}, -1, Q(1));
    lp3.add_constraint({{c, Q(1)}}, +1, Q(2));
    lp3.set_objective({{c, Q(1)}}, true);
    CHECK(lp3.solve().status == LPStatus::Infeasible);

    // unbounded: free variable minimised
    LinearProgram<Q> lp4;
    int d = lp4.add_var(false);
    lp4.add_constraint({{d, Q(1)}}, -1, Q(5));
    lp4.set_objective({{d, Q(1)}}, true);
    CHECK(lp4.solve().status == LPStatus::Unbounded);
}

TEST_CASE("seller oracle reproduces the worked example") {
    auto m = example4_model();
    auto res = oracle_seller_price(m);
    CHECK(res.price == Q(9, 2));
    CHECK(is_self_financing(m, res.strategy).ok);
    for (int n = 0; n < m.num_nodes(); ++n) {
        if (!m.exercisable(n)) continue;
        const auto& cur = res.strategy.entering(m, n);
        const auto& po = *m.payoff(n);
        CHECK(liquidation_value(Q(cur.cash - po.cash), Q(cur.shares - po.shares), m.bid(n),
                                m.ask(n)) >= Q(0));
    }
}

TEST_CASE("buyer oracle reproduces the worked example") {
    CHECK(oracle_buyer_price(example4_model()) == Q(6, 5));
}

TEST_CASE("oracles on the zero payoff") {
    Model<Q> m;
    int r = m.add_root(Q(10), Q(10), CashShares<Q>{Q(0), Q(0)});
    m.add_node(r, Q(12), Q(12), CashShares<Q>{Q(0), Q(0)});
    m.add_node(r, Q(8), Q(8), CashShares<Q>{Q(0), Q(0)});
    CHECK(oracle_seller_price(m).price == Q(0));
    CHECK(oracle_buyer_price(m) == Q(0));
}

TEST_CASE("oracles agree with the recursions on random trees") {
    Rng g(307);
    for (int i = 0; i < 15; ++i) {
        auto m = testsup::random_tree(g, {});
        CHECK(oracle_seller_price(m).price == price_seller_primal(m).price);
        CHECK(oracle_buyer_price(m) == price_buyer(m).price);
    }
}

TEST_CASE("sampled buyer oracle is a valid lower bound") {
    Rng g(331);
    for (int i = 0; i < 8; ++i) {
        auto m = testsup::random_tree(g, {});
        Q bound = oracle_buyer_price_sampled(m, 40, 9000 + i);
        CHECK(bound <= price_buyer(m).price);
    }
    // with enough samples on a small tree the bound is tight
    auto m = example4_model();
    CHECK(oracle_buyer_price_sampled(m, 200, 17) == Q(6, 5));
}

TEST_CASE("node budget is enforced") {
    Rng g(311);
    auto m = testsup::random_tree(g, {});
    CHECK_THROWS_AS(oracle_seller_price(m, 2), BudgetError);
    CHECK_THROWS_AS(oracle_buyer_price(m, 2), BudgetError);
}

TEST_CASE("extremal expectation brackets the certificate") {
    auto m = example4_model();
    auto dual = price_seller_dual(m);
    auto cert = construct_seller_certificate(m, dual);
    // max over Pbar(chi-hat) is attained by the certificate pair
    CHECK(extremal_expectation(m, cert.chi, true) == Q(9, 2));
    CHECK(extremal_expectation(m, cert.chi, false) <= Q(9, 2));
}

TEST_CASE("snell envelope") {
    LatticeParams p;
    p.steps = 20;
    p.cost = 0.0;
    auto lat = build_binomial(p);
    set_put_payoff(lat, 100.0);
    CHECK(snell_envelope(lat) == doctest::Approx(3.0485).epsilon(5e-5));

    auto zero = build_binomial(p);
    set_cash_basket_payoff(zero, {{1e9, +1}});
    CHECK(snell_envelope(zero) == doctest::Approx(0.0));

    LatticeParams pbig;
    pbig.steps = 1000;
    pbig.cost = 0.0;
    auto big = build_binomial(pbig);
    set_put_payoff(big, 100.0);
    CHECK(snell_envelope(big) == doctest::Approx(3.0697).epsilon(5e-5));

    LatticeParams pk;
    pk.steps = 20;
    pk.cost = 0.01;
    auto spread_lat = build_binomial(pk);
    set_put_payoff(spread_lat, 100.0);
    CHECK_THROWS_AS(snell_envelope(spread_lat), ModelError);

    auto tri = build_trinomial(p);
    set_put_payoff(tri, 100.0);
    CHECK_THROWS_AS(snell_envelope(tri), ModelError);

    // two-step by hand: martingale weights 1/2, put on 4-2-1 grid
    Model<Q> m;
    int r = m.add_root(Q(4), Q(4), CashShares<Q>{Q(0), Q(0)});
    int u = m.add_node(r, Q(6), Q(6), CashShares<Q>{Q(0), Q(0)});
    int d = m.add_node(r, Q(2), Q(2), CashShares<Q>{Q(2), Q(0)});
    m.add_node(u, Q(8), Q(8), CashShares<Q>{Q(0), Q(0)});
    m.add_node(u, Q(4), Q(4), CashShares<Q>{Q(0), Q(0)});
    m.add_node(d, Q(3), Q(3), CashShares<Q>{Q(1), Q(0)});
    m.add_node(d, Q(1), Q(1), CashShares<Q>{Q(3), Q(0)});
    // value: down node max(2, avg(1,3) = 2) = 2; root max(0, avg(0,2)) = 1
    CHECK(snell_envelope(m) == Q(1));
}

TEST_CASE("perturbation to an equivalent approximate martingale") {
    auto m = example4_model();
    auto dual = price_seller_dual(m);
    auto cert = construct_seller_certificate(m, dual);
    MartingalePair<Q> eq;
    REQUIRE(no_arbitrage_check(m, &eq).arbitrage_free);
    REQUIRE(eq.equivalent);

    Q delta(1, 1000000);
    auto blend = perturb_to_equivalent(m, cert.ps, eq, cert.chi, delta);
    CHECK(blend.equivalent);
    for (const Q& p : blend.prob) CHECK(p > Q(0));
    CHECK(verify_approx_martingale(m, blend, cert.chi).ok);
    Q e = stopped_payoff_expectation(m, blend, cert.chi);
    Q diff = e - cert.expectation;
    if (diff < Q(0)) diff = -diff;
    CHECK(diff < delta);

    // blending a pair with itself leaves the expectation unchanged
    auto self_blend = perturb_to_equivalent(m, eq, eq, cert.chi, delta);
    CHECK(stopped_payoff_expectation(m, self_blend, cert.chi) ==
          stopped_payoff_expectation(m, eq, cert.chi));

    CHECK_THROWS_AS(perturb_to_equivalent(m, cert.ps, cert.ps, cert.chi, delta), ModelError);
}

TEST_CASE("perturbation keeps masses positive on random models") {
    Rng g(313);
    for (int i = 0; i < 20; ++i) {
        auto m = testsup::random_tree(g, {});
        MartingalePair<Q> eq;
        auto res = no_arbitrage_check(m, &eq);
        REQUIRE(res.arbitrage_free);
        if (!eq.equivalent) continue;
        auto dual = price_seller_dual(m);
        auto cert = construct_seller_certificate(m, dual);
        auto blend = perturb_to_equivalent(m, cert.ps, eq, cert.chi, Q(1, 100));
        for (const Q& p : blend.prob) CHECK(p > Q(0));
        CHECK(verify_approx_martingale(m, blend, cert.chi).ok);
    }
}
