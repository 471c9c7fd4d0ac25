#pragma once

#include <utility>
#include <vector>

#include "bidask/model.hpp"
#include "bidask/plfunction.hpp"
#include "bidask/seller.hpp"

namespace bidask {

// u_t(y) = -xi + (y + zeta)^- S^a - (y + zeta)^+ S^b: cash needed to reach
// solvency from y shares after exercising and receiving (xi, zeta).
// NotExercisable -> Bottom (exercise impossible there).
template <class R>
PLFunction<R> buyer_payoff_fn(const NodePayoff<R>& po, const R& bid, const R& ask) {
    if (ask < bid) throw InvalidSpreadError("buyer_payoff_fn: ask < bid");
    if (!po) return PLFunction<R>::bottom();
    return PLFunction<R>::from_points({-po->shares}, {-po->cash}, -ask, -bid);
}

namespace detail {

// z = min{v, u} where a Bottom u means "no exercise here", not -infinity:
// the minimum is taken over the exercisable branch only.
template <class R>
PLFunction<R> buyer_min(const PLFunction<R>& v, const PLFunction<R>& u) {
    if (u.is_bottom()) return v;
    if (v.is_top()) return u;
    return pl_min(v, u);
}

template <class R>
PLFunction<R> buyer_gradient_restrict(const PLFunction<R>& w, const R& bid, const R& ask) {
    if (w.is_top()) return w;
    PLFunction<R> v = gradient_restrict(w, bid, ask);
    if (v.is_unbounded_below())
        throw ModelError("buyer recursion unbounded below: model admits arbitrage");
    return v;
}

}  // namespace detail

// Backward induction for the bid price; the functions are generally
// non-convex, so there is no dual counterpart. Price-only, level by level.
template <class R, class View>
R buyer_price_view(const View& mv) {
    int T = mv.horizon();
    std::vector<PLFunction<R>> next;
    for (int t = T; t >= 0; --t) {
        std::vector<PLFunction<R>> cur(mv.width(t));
        for (int i = 0; i < mv.width(t); ++i) {
            PLFunction<R> u =
                buyer_payoff_fn(mv.payoff_at(t, i), mv.bid_at(t, i), mv.ask_at(t, i));
            if (t == T) {
                cur[i] = u.is_bottom() ? PLFunction<R>::top() : std::move(u);
            } else {
                PLFunction<R> w = PLFunction<R>::bottom();
                for (int j = 0; j < mv.nsucc(t, i); ++j)
                    w = pl_max(w, next[mv.succ(t, i, j)]);
                PLFunction<R> v =
                    detail::buyer_gradient_restrict(w, mv.bid_at(t, i), mv.ask_at(t, i));
                cur[i] = detail::buyer_min(v, u);
            }
        }
        next = std::move(cur);
    }
    if (next[0].is_top())
        throw ModelError("buyer price degenerate: payoff not exercisable on some path");
    if (!next[0].is_finite()) throw ModelError("buyer price degenerate");
    return -next[0](R(0));
}

template <class R>
struct BuyerRun {
    R price{};
    std::vector<PLFunction<R>> z, v, w, u;  // by node id
};

template <class R>
BuyerRun<R> price_buyer(const Model<R>& m) {
    BuyerRun<R> run;
    int N = m.num_nodes();
    run.z.resize(N);
    run.v.resize(N);
    run.w.resize(N);
    run.u.resize(N);
    for (int t = m.horizon(); t >= 0; --t) {
        for (int n : m.nodes_at(t)) {
            run.u[n] = buyer_payoff_fn(m.payoff(n), m.bid(n), m.ask(n));
            if (m.is_leaf(n)) {
                run.z[n] = run.u[n].is_bottom() ? PLFunction<R>::top() : run.u[n];
                run.v[n] = run.w[n] = run.z[n];
            } else {
                PLFunction<R> w = PLFunction<R>::bottom();
                for (int c : m.children(n)) w = pl_max(w, run.z[c]);
                run.w[n] = w;
                run.v[n] = detail::buyer_gradient_restrict(w, m.bid(n), m.ask(n));
                run.z[n] = detail::buyer_min(run.v[n], run.u[n]);
            }
        }
    }
    if (run.z[0].is_top())
        throw ModelError("buyer price degenerate: payoff not exercisable on some path");
    if (!run.z[0].is_finite()) throw ModelError("buyer price degenerate");
    run.price = -run.z[0](R(0));
    return run;
}

// Strategy and pure stopping time superhedging the buyer from any
// (gamma, delta) in epi z_0; the position freezes once exercised.
template <class R>
std::pair<Strategy<R>, PureStop> hedge_buyer(const Model<R>& m, const BuyerRun<R>& run,
                                             CashShares<R> initial) {
    if (!run.z[0].epi_contains(initial.cash, initial.shares))
        throw InsufficientEndowmentError("initial portfolio outside epi z_0");
    Strategy<R> s;
    s.initial = std::move(initial);
    s.next.resize(m.num_nodes());
    PureStop st;
    st.stop.assign(m.num_nodes(), 0);
    std::vector<uint8_t> frozen(m.num_nodes(), 0);
    st.stop[0] = m.exercisable(0) &&
                 run.u[0].epi_contains(s.initial.cash, s.initial.shares);
    frozen[0] = st.stop[0];
    for (int t = 0; t < m.horizon(); ++t) {
        for (int n : m.nodes_at(t)) {
            const CashShares<R>& cur = s.entering(m, n);
            CashShares<R> nxt = cur;
            if (!frozen[n]) {
                if (run.w[n].is_top())
                    throw ModelError("buyer hedge: continuation impossible");
                nxt = detail::rebalance_into(cur, run.w[n], m.bid(n), m.ask(n));
            }
            s.next[n] = nxt;
            for (int c : m.children(n)) {
                if (frozen[n]) {
                    frozen[c] = 1;
                    continue;
                }
                st.stop[c] =
                    m.exercisable(c) && run.u[c].epi_contains(nxt.cash, nxt.shares);
                frozen[c] = st.stop[c];
            }
        }
    }
    // deferring past T-1 is impossible: epi z_T = epi u_T
    for (int n : m.nodes_at(m.horizon()))
        if (!frozen[n] && !st.stop[n])
            throw ModelError("buyer hedge: path reached the horizon unexercised");
    return {std::move(s), std::move(st)};
}

// Buyer's approximate martingale via reflection: feed the payoff
// (-xi, -zeta) at the exercise nodes of tau (NotExercisable elsewhere) into
// the seller's stopping-time construction. The resulting mixed time is tau
// itself and E_P(xi_tau + S_tau zeta_tau) equals the bid price.
template <class R>
struct BuyerCertificate {
    PureStop tau;
    MartingalePair<R> ps;  // (P_check, S_check)
    R expectation{};       // E(xi_tau + S_tau zeta_tau)
};

template <class R>
BuyerCertificate<R> construct_buyer_certificate(const Model<R>& m, const PureStop& tau) {
    Model<R> reflected = m;
    for (int n = 0; n < m.num_nodes(); ++n) {
        if (tau.stop[n]) {
            const auto& po = m.payoff(n);
            if (!po) throw ModelError("buyer certificate: stopping at NotExercisable node");
            reflected.set_payoff(n, CashShares<R>{-po->cash, -po->shares});
        } else {
            reflected.set_payoff(n, std::nullopt);
        }
    }
    SellerDualRun<R> dual = price_seller_dual(reflected);
    SellerCertificate<R> cert = construct_seller_certificate(reflected, dual);
    BuyerCertificate<R> out;
    out.tau = tau;
    out.ps = cert.ps;
    // the mixed time from the construction is exactly tau
    for (int n = 0; n < m.num_nodes(); ++n) {
        R want = tau.stop[n] ? R(1) : R(0);
        if (!Arith<R>::close(cert.chi.mass[n], want))
            throw ModelError("buyer certificate: constructed mixed time differs from tau");
    }
    R total(0);
    for (int n = 0; n < m.num_nodes(); ++n) {
        if (!tau.stop[n] || out.ps.prob[n] == R(0)) continue;
        const auto& po = m.payoff(n);
        total += out.ps.prob[n] * (po->cash + out.ps.price[n] * po->shares);
    }
    out.expectation = total;
    return out;
}

}  // namespace bidask
