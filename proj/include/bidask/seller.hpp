#pragma once

#include <utility>
#include <vector>

#include "bidask/concave.hpp"
#include "bidask/lattice.hpp"
#include "bidask/model.hpp"
#include "bidask/plfunction.hpp"

namespace bidask {

// u_t(y) = xi + (y - zeta)^- S^a - (y - zeta)^+ S^b: cash needed at this node
// to settle the payoff from a position of y shares. NotExercisable -> Bottom.
template <class R>
ConvexPL<R> seller_payoff_fn(const NodePayoff<R>& po, const R& bid, const R& ask) {
    if (ask < bid) throw InvalidSpreadError("seller_payoff_fn: ask < bid");
    if (!po) return ConvexPL<R>::bottom();
    return ConvexPL<R>(PLFunction<R>::from_points({po->shares}, {po->cash}, -ask, -bid));
}

// Dual payoff U_t(x) = xi + x zeta on [S^b, S^a], -infinity outside.
template <class R>
ConcavePL<R> seller_payoff_dual(const NodePayoff<R>& po, const R& bid, const R& ask) {
    if (ask < bid) throw InvalidSpreadError("seller_payoff_dual: ask < bid");
    if (!po) return ConcavePL<R>::bottom();
    return ConcavePL<R>::interval(bid, ask, po->cash + bid * po->shares,
                                  po->cash + ask * po->shares);
}

namespace detail {

template <class R>
ConvexPL<R> seller_step(const ConvexPL<R>& w, const ConvexPL<R>& u, const R& bid, const R& ask,
                        ConvexPL<R>* v_out) {
    PLFunction<R> vfn = gradient_restrict_convex(w, bid, ask);
    if (vfn.is_unbounded_below())
        throw ModelError("seller recursion unbounded below: model admits arbitrage");
    ConvexPL<R> v(std::move(vfn));
    if (v_out) *v_out = v;
    return pl_max(v, u);
}

}  // namespace detail

// Backward induction for the ask price: z_{t-1} = max{gr(w_{t-1}), u_{t-1}}
// with w_{t-1} the successor maximum. Price-only variant keeping one level
// of functions alive; runs on lattices and trees alike.
template <class R, class View>
R seller_price_view(const View& mv) {
    int T = mv.horizon();
    std::vector<ConvexPL<R>> next;
    for (int t = T; t >= 0; --t) {
        std::vector<ConvexPL<R>> cur(mv.width(t));
        for (int i = 0; i < mv.width(t); ++i) {
            ConvexPL<R> u = seller_payoff_fn(mv.payoff_at(t, i), mv.bid_at(t, i), mv.ask_at(t, i));
            if (t == T) {
                cur[i] = std::move(u);
            } else {
                ConvexPL<R> w;
                for (int j = 0; j < mv.nsucc(t, i); ++j)
                    w = pl_max(w, next[mv.succ(t, i, j)]);
                cur[i] = detail::seller_step<R>(w, u, mv.bid_at(t, i), mv.ask_at(t, i), nullptr);
            }
        }
        next = std::move(cur);
    }
    if (!next[0].is_finite())
        throw ModelError("seller price degenerate: payoff nowhere exercisable");
    return next[0](R(0));
}

// Dual recursion, price only; agrees with seller_price_view and serves as an
// independent route for verification runs on lattices.
template <class R, class View>
R seller_price_dual_view(const View& mv) {
    int T = mv.horizon();
    std::vector<ConcavePL<R>> next;
    for (int t = T; t >= 0; --t) {
        std::vector<ConcavePL<R>> cur(mv.width(t));
        for (int i = 0; i < mv.width(t); ++i) {
            ConcavePL<R> U =
                seller_payoff_dual(mv.payoff_at(t, i), mv.bid_at(t, i), mv.ask_at(t, i));
            if (t == T) {
                cur[i] = std::move(U);
            } else {
                std::vector<ConcavePL<R>> zs;
                zs.reserve(mv.nsucc(t, i));
                for (int j = 0; j < mv.nsucc(t, i); ++j)
                    zs.push_back(next[mv.succ(t, i, j)]);
                ConcavePL<R> W = concave_cap(zs);
                ConcavePL<R> V = domain_restrict(W, mv.bid_at(t, i), mv.ask_at(t, i));
                if (V.is_bottom() && !W.is_bottom())
                    throw ModelError("seller dual recursion: empty domain, model admits arbitrage");
                cur[i] = concave_cap(V, U);
            }
        }
        next = std::move(cur);
    }
    if (next[0].is_bottom())
        throw ModelError("seller price degenerate: payoff nowhere exercisable");
    return next[0].argmax_leftmost().second;
}

// Full primal run on a tree, retaining z, v, w, u per node for hedging.
template <class R>
struct SellerRun {
    R price{};
    std::vector<ConvexPL<R>> z, v, w, u;  // by node id
};

template <class R>
SellerRun<R> price_seller_primal(const Model<R>& m) {
    SellerRun<R> run;
    int N = m.num_nodes();
    run.z.resize(N);
    run.v.resize(N);
    run.w.resize(N);
    run.u.resize(N);
    for (int t = m.horizon(); t >= 0; --t) {
        for (int n : m.nodes_at(t)) {
            run.u[n] = seller_payoff_fn(m.payoff(n), m.bid(n), m.ask(n));
            if (m.is_leaf(n)) {
                run.z[n] = run.v[n] = run.w[n] = run.u[n];
            } else {
                ConvexPL<R> w;
                for (int c : m.children(n)) w = pl_max(w, run.z[c]);
                run.w[n] = w;
                run.z[n] = detail::seller_step(w, run.u[n], m.bid(n), m.ask(n), &run.v[n]);
            }
        }
    }
    if (!run.z[0].is_finite())
        throw ModelError("seller price degenerate: payoff nowhere exercisable");
    run.price = run.z[0](R(0));
    return run;
}

// Dual run: Z_{t-1} = cap{dr(W_{t-1}), U_{t-1}} with W the successor cap;
// the ask price is the maximum of Z_0.
template <class R>
struct SellerDualRun {
    R price{};
    std::vector<ConcavePL<R>> Z, V, W, U;  // by node id
};

template <class R>
SellerDualRun<R> price_seller_dual(const Model<R>& m) {
    SellerDualRun<R> run;
    int N = m.num_nodes();
    run.Z.resize(N);
    run.V.resize(N);
    run.W.resize(N);
    run.U.resize(N);
    for (int t = m.horizon(); t >= 0; --t) {
        for (int n : m.nodes_at(t)) {
            run.U[n] = seller_payoff_dual(m.payoff(n), m.bid(n), m.ask(n));
            if (m.is_leaf(n)) {
                run.Z[n] = run.V[n] = run.W[n] = run.U[n];
            } else {
                std::vector<ConcavePL<R>> zs;
                zs.reserve(m.children(n).size());
                for (int c : m.children(n)) zs.push_back(run.Z[c]);
                run.W[n] = concave_cap(zs);
                run.V[n] = domain_restrict(run.W[n], m.bid(n), m.ask(n));
                if (run.V[n].is_bottom() && !run.W[n].is_bottom())
                    throw ModelError("seller dual recursion: empty domain, model admits arbitrage");
                run.Z[n] = concave_cap(run.V[n], run.U[n]);
            }
        }
    }
    if (run.Z[0].is_bottom())
        throw ModelError("seller price degenerate: payoff nowhere exercisable");
    run.price = run.Z[0].argmax_leftmost().second;
    return run;
}

namespace detail {

// Trade from `cur` into the epigraph of `target` at prices (bid, ask):
// cash after trading x is cash + x^- bid - x^+ ask. Among feasible trades,
// flatten the stock position as much as possible, then trade as little as
// possible. In double mode a small slack keeps touching solutions feasible.
template <class R>
CashShares<R> rebalance_into(const CashShares<R>& cur, const PLFunction<R>& target,
                             const R& bid, const R& ask) {
    if (target.is_bottom()) return cur;
    // proceeds(x) = cash + x^- bid - x^+ ask: selling at bid, buying at ask
    PLFunction<R> proceeds = PLFunction<R>::from_points({R(0)}, {cur.cash}, -bid, -ask);
    PLFunction<R> D = pl_add(proceeds, negate(shift_arg(target, cur.shares)));
    auto x = closest_feasible(D, R(-cur.shares));
    if constexpr (!Arith<R>::exact) {
        if (!x) {
            // touching-point solution missed by rounding: widen by the tolerance
            R scale = std::max(R(1), cur.cash >= R(0) ? cur.cash : -cur.cash);
            D = pl_add(D, PLFunction<R>::affine(Arith<R>::tol() * scale, R(0)));
            x = closest_feasible(D, R(-cur.shares));
        }
    }
    if (!x) throw ModelError("rebalance: no self-financing trade reaches the target epigraph");
    return CashShares<R>{proceeds(*x), cur.shares + *x};
}

}  // namespace detail

// Superhedging strategy for the seller starting from any (gamma, delta) in
// epi z_0; holds (alpha_t, beta_t) in epi z_t at every node.
template <class R>
Strategy<R> hedge_seller(const Model<R>& m, const SellerRun<R>& run, CashShares<R> initial) {
    if (!run.z[0].epi_contains(initial.cash, initial.shares))
        throw InsufficientEndowmentError("initial portfolio outside epi z_0");
    Strategy<R> s;
    s.initial = std::move(initial);
    s.next.resize(m.num_nodes());
    for (int t = 0; t < m.horizon(); ++t)
        for (int n : m.nodes_at(t))
            s.next[n] = detail::rebalance_into(s.entering(m, n), run.w[n].fn(), m.bid(n),
                                               m.ask(n));
    return s;
}

// Mixed stopping time and approximate martingale realising the ask price,
// with the auxiliary processes of the construction.
template <class R>
struct SellerCertificate {
    MixedStop<R> chi;
    MartingalePair<R> ps;     // (P_hat, S_hat)
    std::vector<R> cond;      // conditional probabilities p_hat
    std::vector<R> lambda;    // exercised proportion of the current holding
    std::vector<R> X, Y;      // auxiliary price processes
    std::vector<R> Zv, Uv, Vv;
    std::vector<uint8_t> Zfin, Ufin, Vfin;  // value processes finite?
    R expectation{};          // E_Phat((xi + S zeta)_chi)
};

template <class R>
SellerCertificate<R> construct_seller_certificate(const Model<R>& m,
                                                  const SellerDualRun<R>& run) {
    int N = m.num_nodes();
    SellerCertificate<R> cert;
    cert.chi.mass.assign(N, R(0));
    cert.ps.prob.assign(N, R(0));
    cert.ps.price.assign(N, R(0));
    cert.cond.assign(N, R(0));
    cert.lambda.assign(N, R(0));
    cert.X.assign(N, R(0));
    cert.Y.assign(N, R(0));
    cert.Zv.assign(N, R(0));
    cert.Uv.assign(N, R(0));
    cert.Vv.assign(N, R(0));
    cert.Zfin.assign(N, 0);
    cert.Ufin.assign(N, 0);
    cert.Vfin.assign(N, 0);

    std::vector<R> remaining(N, R(0));  // chi*_t along the path
    cert.ps.prob[0] = R(1);
    cert.cond[0] = R(1);
    remaining[0] = R(1);
    cert.Y[0] = run.Z[0].is_bottom() ? m.bid(0) : run.Z[0].argmax_leftmost().first;

    for (int t = 0; t <= m.horizon(); ++t) {
        for (int n : m.nodes_at(t)) {
            const ConcavePL<R>& Z = run.Z[n];
            const ConcavePL<R>& V = run.V[n];
            const ConcavePL<R>& U = run.U[n];
            const R& y = cert.Y[n];
            R lam(0), xhat = y, shat = std::clamp(y, m.bid(n), m.ask(n));
            if (m.is_leaf(n)) {
                lam = R(1);  // terminal closure
                xhat = shat = y;
            } else if (!Z.is_bottom()) {
                auto atoms = cap_decompose(std::vector<ConcavePL<R>>{V, U}, Z, y);
                if (atoms.size() == 1) {
                    if (atoms[0].index == 0) {
                        lam = R(0);
                        xhat = y;
                    } else {
                        lam = R(1);
                        shat = y;
                        xhat = V.is_bottom() ? y : V.argmax_leftmost().first;
                    }
                } else {
                    // one atom on V (continuation), one on U (exercise)
                    for (const auto& a : atoms) {
                        if (a.index == 0)
                            xhat = a.x;
                        else {
                            lam = a.weight;
                            shat = a.x;
                        }
                    }
                }
            }
            cert.lambda[n] = lam;
            cert.X[n] = xhat;
            cert.ps.price[n] = shat;
            cert.chi.mass[n] = lam * remaining[n];
            if (!Z.is_bottom() && Z.in_dom(y)) {
                cert.Zv[n] = Z(y);
                cert.Zfin[n] = 1;
            }
            if (!U.is_bottom() && U.in_dom(shat)) {
                cert.Uv[n] = U(shat);
                cert.Ufin[n] = 1;
            }
            if (!V.is_bottom() && V.in_dom(xhat)) {
                cert.Vv[n] = V(xhat);
                cert.Vfin[n] = 1;
            }
            if (m.is_leaf(n)) continue;

            const auto& kids = m.children(n);
            R rem_next = remaining[n] * (R(1) - lam);
            for (int c : kids) remaining[c] = rem_next;
            bool decomposed = false;
            if (!V.is_bottom() && run.W[n].in_dom(xhat)) {
                std::vector<ConcavePL<R>> zs;
                zs.reserve(kids.size());
                for (int c : kids) zs.push_back(run.Z[c]);
                auto atoms = cap_decompose(zs, run.W[n], xhat);
                for (const auto& a : atoms) {
                    int c = kids[a.index];
                    cert.cond[c] += a.weight;
                    cert.Y[c] = a.x;
                }
                decomposed = true;
            } else {
                cert.cond[kids[0]] = R(1);
            }
            for (size_t j = 0; j < kids.size(); ++j) {
                int c = kids[j];
                if (decomposed && cert.cond[c] > R(0)) {
                    // Y already set by the atom
                } else if (!run.Z[c].is_bottom()) {
                    cert.Y[c] = run.Z[c].argmax_leftmost().first;
                } else {
                    cert.Y[c] = std::clamp(xhat, m.bid(c), m.ask(c));
                }
                cert.ps.prob[c] = cert.cond[c] * cert.ps.prob[n];
            }
        }
    }
    cert.expectation = stopped_payoff_expectation(m, cert.ps, cert.chi);
    return cert;
}

// The equalities binding the certificate together, checked nodewise: the
// price identity chi*_t Y = chi*_{t+1} X + chi_t S everywhere, the value
// identity chi*_t Z = chi*_{t+1} V + chi_t U where the values are finite
// (a zero weight silences the matching term), and the conditional
// expectations X = E(Y|F), V = E(Z|F) wherever the continuation
// decomposition ran.
template <class R>
bool certificate_identities_hold(const Model<R>& m, const SellerCertificate<R>& cert,
                                 std::string* why = nullptr) {
    auto fail = [&](int n, const char* what) {
        if (why) *why = std::string(what) + " at node " + std::to_string(n);
        return false;
    };
    std::vector<R> star = chi_star(m, cert.chi);
    for (int n = 0; n < m.num_nodes(); ++n) {
        R rem = star[n];
        R rem_next = rem - cert.chi.mass[n];
        R lhs = rem * cert.Y[n];
        R rhs = rem_next * cert.X[n] + cert.chi.mass[n] * cert.ps.price[n];
        if (!Arith<R>::close(lhs, rhs)) return fail(n, "price identity");
        if (cert.Zfin[n] && rem != R(0)) {
            if (rem_next != R(0) && !cert.Vfin[n]) return fail(n, "V not finite");
            if (cert.chi.mass[n] != R(0) && !cert.Ufin[n]) return fail(n, "U not finite");
            R vterm = rem_next != R(0) ? rem_next * cert.Vv[n] : R(0);
            R uterm = cert.chi.mass[n] != R(0) ? cert.chi.mass[n] * cert.Uv[n] : R(0);
            if (!Arith<R>::close(rem * cert.Zv[n], vterm + uterm))
                return fail(n, "value identity");
        }
        if (!m.is_leaf(n) && cert.Vfin[n]) {
            R ex(0), ev(0), psum(0);
            for (int c : m.children(n)) {
                ex += cert.cond[c] * cert.Y[c];
                if (cert.cond[c] != R(0)) {
                    if (!cert.Zfin[c]) return fail(n, "successor Z not finite");
                    ev += cert.cond[c] * cert.Zv[c];
                }
                psum += cert.cond[c];
            }
            if (!Arith<R>::close(psum, R(1))) return fail(n, "conditional masses");
            if (!Arith<R>::close(ex, cert.X[n])) return fail(n, "X = E(Y | F)");
            if (!Arith<R>::close(ev, cert.Vv[n])) return fail(n, "V = E(Z | F)");
        }
    }
    return true;
}

// Enumerates every pure stopping time that exercises at exercisable nodes
// only; throws BudgetError beyond `budget` stopping times.
template <class R>
std::vector<PureStop> enumerate_pure_stops(const Model<R>& m, size_t budget = 100000) {
    // local patterns per node, as node lists
    std::vector<std::vector<std::vector<int>>> pat(m.num_nodes());
    for (int t = m.horizon(); t >= 0; --t) {
        for (int n : m.nodes_at(t)) {
            auto& out = pat[n];
            if (m.exercisable(n)) out.push_back({n});
            if (!m.is_leaf(n)) {
                // cartesian product of the children's patterns
                std::vector<std::vector<int>> acc{{}};
                for (int c : m.children(n)) {
                    std::vector<std::vector<int>> nxt;
                    for (const auto& base : acc) {
                        for (const auto& add : pat[c]) {
                            nxt.push_back(base);
                            nxt.back().insert(nxt.back().end(), add.begin(), add.end());
                            if (nxt.size() + out.size() > budget)
                                throw BudgetError("stopping time enumeration exceeds budget");
                        }
                    }
                    acc = std::move(nxt);
                    if (acc.empty()) break;
                }
                for (auto& v : acc) out.push_back(std::move(v));
            }
        }
    }
    std::vector<PureStop> stops;
    stops.reserve(pat[0].size());
    for (const auto& nodes : pat[0]) {
        PureStop st;
        st.stop.assign(m.num_nodes(), 0);
        for (int n : nodes) st.stop[n] = 1;
        stops.push_back(std::move(st));
    }
    return stops;
}

// Ask price of the payoff masked to the exercise nodes of tau: the value of
// hedging against that single pure stopping time.
template <class R>
R seller_value_of_pure_stop(const Model<R>& m, const PureStop& st) {
    Model<R> masked = m;
    for (int n = 0; n < m.num_nodes(); ++n)
        if (!st.stop[n]) masked.set_payoff(n, std::nullopt);
    return price_seller_dual(masked).price;
}

// max over pure stopping times of the hedging value against that time alone,
// versus the full ask price. The gap is strictly positive exactly when mixed
// stopping times are essential.
template <class R>
std::pair<R, R> check_pure_stopping_gap(const Model<R>& m, size_t budget = 100000,
                                        size_t node_budget = 4096) {
    if (static_cast<size_t>(m.num_nodes()) > node_budget)
        throw BudgetError("check_pure_stopping_gap: tree exceeds node budget");
    R ask = price_seller_dual(m).price;
    auto stops = enumerate_pure_stops(m, budget);
    if (stops.empty()) throw ModelError("no pure stopping time exercises the payoff");
    bool first = true;
    R best{};
    for (const auto& st : stops) {
        R v = seller_value_of_pure_stop(m, st);
        if (first || v > best) {
            best = v;
            first = false;
        }
    }
    return {best, ask};
}

}  // namespace bidask
