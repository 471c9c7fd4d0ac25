#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bidask/buyer.hpp"
#include "bidask/lattice.hpp"
#include "bidask/oracle.hpp"
#include "bidask/report.hpp"
#include "support.hpp"

using namespace bidask;
using testsup::Rng;
using Q = Rational;

namespace {

template <class R>
bool buyer_superhedges_at_stops(const Model<R>& m, const Strategy<R>& s, const PureStop& tau) {
    for (int n = 0; n < m.num_nodes(); ++n) {
        if (!tau.stop[n]) continue;
        if (!m.exercisable(n)) return false;
        const auto& cur = s.entering(m, n);
        const auto& po = *m.payoff(n);
        R v = liquidation_value(R(cur.cash + po.cash), R(cur.shares + po.shares), m.bid(n),
                                m.ask(n));
        if (!Arith<R>::geq(v, R(0))) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("buyer payoff function") {
    auto u = buyer_payoff_fn<Q>(CashShares<Q>{Q(3), Q(0)}, Q(8), Q(16));
    CHECK(u(Q(0)) == Q(-3));
    CHECK(u(Q(1)) == Q(-3) - Q(8));
    CHECK(u(Q(-1)) == Q(-3) + Q(16));
    auto z = buyer_payoff_fn<Q>(CashShares<Q>{Q(0), Q(0)}, Q(5), Q(5));
    CHECK(z == PLFunction<Q>::affine(Q(0), Q(-5)));
    CHECK(buyer_payoff_fn<Q>(std::nullopt, Q(5), Q(5)).is_bottom());
}

TEST_CASE("worked example: bid price") {
    auto m = example4_model();
    auto run = price_buyer(m);
    CHECK(run.price == Q(6, 5));
    // the root function is affine: z_0(y) = -10y - 6/5
    CHECK(run.z[0] == PLFunction<Q>::affine(Q(-6, 5), Q(-10)));
    // non-convex value function at the up node
    CHECK(!run.z[1].is_convex());
}

TEST_CASE("zero payoff and degenerate cases") {
    Model<Q> m;
    int r = m.add_root(Q(10), Q(10), CashShares<Q>{Q(0), Q(0)});
    m.add_node(r, Q(12), Q(12), CashShares<Q>{Q(0), Q(0)});
    m.add_node(r, Q(8), Q(8), CashShares<Q>{Q(0), Q(0)});
    CHECK(price_buyer(m).price == Q(0));

    // a path with no exercisable node at all makes the buyer's problem
    // infeasible (here the root is not exercisable either)
    Model<Q> bad;
    int br = bad.add_root(Q(10), Q(10));
    bad.add_node(br, Q(12), Q(12), CashShares<Q>{Q(1), Q(0)});
    bad.add_node(br, Q(8), Q(8));
    CHECK_THROWS_AS(price_buyer(bad), ModelError);
}

TEST_CASE("worked example: buyer hedge and stopping time") {
    auto m = example4_model();
    auto run = price_buyer(m);
    auto [s, tau] = hedge_buyer(m, run, CashShares<Q>{Q(-6, 5), Q(0)});
    CHECK(!tau.stop[0]);
    CHECK(tau.stop[1]);
    CHECK(tau.stop[2]);
    CHECK(s.next[0].cash == Q(9, 5));
    CHECK(s.next[0].shares == Q(-3, 10));
    // frozen after exercise
    CHECK(s.next[1].cash == Q(9, 5));
    CHECK(s.next[1].shares == Q(-3, 10));
    CHECK(s.next[2].cash == Q(9, 5));
    CHECK(s.next[2].shares == Q(-3, 10));
    CHECK(is_self_financing(m, s).ok);
    CHECK(buyer_superhedges_at_stops(m, s, tau));
    CHECK_THROWS_AS(hedge_buyer(m, run, CashShares<Q>{Q(-2), Q(0)}),
                    InsufficientEndowmentError);
}

TEST_CASE("buyer with an immediately solvent endowment stops at the root") {
    auto m = example4_model();
    auto run = price_buyer(m);
    auto [s, tau] = hedge_buyer(m, run, CashShares<Q>{Q(0), Q(0)});
    CHECK(tau.stop[0]);
    CHECK(s.next[0].cash == Q(0));
}

TEST_CASE("buyer must exercise before the window closes") {
    Model<Q> m;
    int r = m.add_root(Q(10), Q(10), CashShares<Q>{Q(0), Q(0)});
    int u = m.add_node(r, Q(11), Q(13), CashShares<Q>{Q(3), Q(0)});
    int d = m.add_node(r, Q(7), Q(9), CashShares<Q>{Q(1), Q(0)});
    m.add_node(u, Q(12), Q(12));
    m.add_node(u, Q(11), Q(11));
    m.add_node(d, Q(8), Q(8));
    m.add_node(d, Q(7), Q(7));
    auto run = price_buyer(m);
    auto [s, tau] = hedge_buyer(m, run, CashShares<Q>{Q(-run.price), Q(0)});
    for (int n : {3, 4, 5, 6}) CHECK(!tau.stop[n]);
    CHECK((tau.stop[0] || (tau.stop[1] && tau.stop[2])));
    auto cert = construct_buyer_certificate(m, tau);
    CHECK(cert.expectation == run.price);
    CHECK(oracle_buyer_price(m) == run.price);
}

TEST_CASE("buyer hedges on random trees") {
    Rng g(211);
    for (int i = 0; i < 40; ++i) {
        auto m = testsup::random_tree(g, {});
        auto run = price_buyer(m);
        auto [s, tau] = hedge_buyer(m, run, CashShares<Q>{Q(-run.price), Q(0)});
        CHECK(is_self_financing(m, s).ok);
        CHECK(buyer_superhedges_at_stops(m, s, tau));
        CHECK(is_valid_mixed_stop(m, tau.to_mixed<Q>()));
    }
}

TEST_CASE("worked example: buyer approximate martingale by reflection") {
    auto m = example4_model();
    auto run = price_buyer(m);
    auto [s, tau] = hedge_buyer(m, run, CashShares<Q>{Q(-6, 5), Q(0)});
    auto cert = construct_buyer_certificate(m, tau);
    CHECK(cert.ps.prob[1] == Q(2, 5));
    CHECK(cert.ps.prob[2] == Q(3, 5));
    CHECK(cert.ps.price[0] == Q(10));
    CHECK(cert.ps.price[1] == Q(16));
    CHECK(cert.ps.price[2] == Q(6));
    CHECK(cert.ps.price[3] == Q(16));
    CHECK(cert.ps.price[4] == Q(10));
    CHECK(cert.ps.price[5] == Q(10));
    CHECK(cert.ps.price[6] == Q(4));
    CHECK(cert.expectation == Q(6, 5));
    CHECK(verify_approx_martingale(m, cert.ps, tau.to_mixed<Q>()).ok);
}

TEST_CASE("payoff only at the horizon stops at the horizon") {
    Model<Q> m;
    int r = m.add_root(Q(10), Q(10));
    int u = m.add_node(r, Q(12), Q(12));
    int d = m.add_node(r, Q(8), Q(8));
    m.add_node(u, Q(13), Q(13), CashShares<Q>{Q(2), Q(0)});
    m.add_node(u, Q(11), Q(11), CashShares<Q>{Q(1), Q(0)});
    m.add_node(d, Q(9), Q(9), CashShares<Q>{Q(1), Q(0)});
    m.add_node(d, Q(7), Q(7), CashShares<Q>{Q(3), Q(0)});
    auto run = price_buyer(m);
    auto [s, tau] = hedge_buyer(m, run, CashShares<Q>{Q(-run.price), Q(0)});
    for (int n = 0; n < m.num_nodes(); ++n) CHECK(static_cast<bool>(tau.stop[n]) == m.is_leaf(n));
    auto cert = construct_buyer_certificate(m, tau);
    CHECK(cert.expectation == run.price);
}

TEST_CASE("buyer certificates on random trees realise the bid price") {
    Rng g(223);
    for (int i = 0; i < 40; ++i) {
        auto m = testsup::random_tree(g, {});
        auto run = price_buyer(m);
        auto [s, tau] = hedge_buyer(m, run, CashShares<Q>{Q(-run.price), Q(0)});
        auto cert = construct_buyer_certificate(m, tau);
        CHECK(cert.expectation == run.price);
        CHECK(verify_approx_martingale(m, cert.ps, tau.to_mixed<Q>()).ok);
        // the buyer's optimal stopping time is pure by construction
        for (const Q& mass : cert.ps.prob) CHECK(mass >= Q(0));
    }
}

TEST_CASE("reflection identity against the extremal-expectation oracle") {
    // min over Pbar(tau) of E(xi_tau + S_tau zeta_tau) equals the negated ask
    // price of the reflected payoff, for every enumerated pure stopping time
    Rng g(227);
    testsup::TreeGenOptions opt;
    opt.depth = 2;
    for (int i = 0; i < 10; ++i) {
        auto m = testsup::random_tree(g, opt);
        auto stops = enumerate_pure_stops(m, 1000);
        Q best{};
        bool first = true;
        for (const auto& tau : stops) {
            Model<Q> reflected = m;
            for (int n = 0; n < m.num_nodes(); ++n) {
                if (tau.stop[n]) {
                    auto po = *m.payoff(n);
                    reflected.set_payoff(n, CashShares<Q>{-po.cash, -po.shares});
                } else {
                    reflected.set_payoff(n, std::nullopt);
                }
            }
            Q lhs = extremal_expectation(m, tau.to_mixed<Q>(), false);
            Q rhs = -price_seller_dual(reflected).price;
            CHECK(lhs == rhs);
            if (first || lhs > best) {
                best = lhs;
                first = false;
            }
        }
        // representation: bid = max over pure tau of the reflected value
        CHECK(best == price_buyer(m).price);
    }
}

TEST_CASE("bid never exceeds ask") {
    Rng g(229);
    for (int i = 0; i < 60; ++i) {
        auto m = testsup::random_tree(g, {});
        CHECK(price_buyer(m).price <= price_seller_dual(m).price);
    }
}

TEST_CASE("zero costs collapse both prices to the Snell envelope") {
    LatticeParams p;
    p.steps = 20;
    p.cost = 0.0;
    auto lat = build_binomial(p);
    set_put_payoff(lat, 100.0);
    double ask = seller_price_view<double>(lat);
    double bid = buyer_price_view<double>(lat);
    double snell = snell_envelope(lat);
    CHECK(ask == doctest::Approx(snell).epsilon(1e-12));
    CHECK(bid == doctest::Approx(snell).epsilon(1e-12));
}

TEST_CASE("table cell: put bid at half-percent costs") {
    LatticeParams p;
    p.steps = 20;
    p.cost = 0.005;
    auto lat = build_binomial(p);
    set_put_payoff(lat, 100.0);
    CHECK(buyer_price_view<double>(lat) == doctest::Approx(2.0917).epsilon(5e-5));
}
