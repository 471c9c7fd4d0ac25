#pragma once

#include <algorithm>
#include <cassert>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "bidask/arith.hpp"
#include "bidask/errors.hpp"

namespace bidask {

// A cash/shares pair; used both for payoffs (xi, zeta) and portfolio
// holdings (alpha, beta).
template <class R>
struct CashShares {
    R cash{};
    R shares{};
};

// NotExercisable nodes carry no payoff, encoding (-inf, -inf).
template <class R>
using NodePayoff = std::optional<CashShares<R>>;

// Finite filtered market on a rooted event tree. Nodes are indexed in
// creation order; node 0 is the root. Every leaf sits at depth horizon().
template <class R>
class Model {
public:
    int add_root(R bid, R ask, NodePayoff<R> payoff = std::nullopt) {
        assert(parent_.empty());
        return add(-1, std::move(bid), std::move(ask), std::move(payoff));
    }

    int add_node(int parent, R bid, R ask, NodePayoff<R> payoff = std::nullopt) {
        assert(parent >= 0 && parent < num_nodes());
        return add(parent, std::move(bid), std::move(ask), std::move(payoff));
    }

    int num_nodes() const { return static_cast<int>(parent_.size()); }
    int horizon() const { return static_cast<int>(levels_.size()) - 1; }
    int time(int n) const { return time_[n]; }
    int parent(int n) const { return parent_[n]; }
    const std::vector<int>& children(int n) const { return children_[n]; }
    bool is_leaf(int n) const { return children_[n].empty(); }
    const std::vector<std::vector<int>>& levels() const { return levels_; }
    const std::vector<int>& nodes_at(int t) const { return levels_[t]; }

    const R& bid(int n) const { return bid_[n]; }
    const R& ask(int n) const { return ask_[n]; }
    const NodePayoff<R>& payoff(int n) const { return payoff_[n]; }
    bool exercisable(int n) const { return payoff_[n].has_value(); }

    void set_payoff(int n, NodePayoff<R> p) { payoff_[n] = std::move(p); }

    // Spreads valid and every leaf at the common horizon.
    void validate() const {
        if (num_nodes() == 0) throw ModelError("empty model");
        for (int n = 0; n < num_nodes(); ++n) {
            if (!(bid_[n] > R(0))) throw InvalidSpreadError("bid price must be positive");
            if (ask_[n] < bid_[n]) throw InvalidSpreadError("ask below bid");
            if (is_leaf(n) && time_[n] != horizon())
                throw ModelError("leaf before the time horizon");
        }
    }

private:
    int add(int parent, R bid, R ask, NodePayoff<R> payoff) {
        int id = num_nodes();
        parent_.push_back(parent);
        children_.emplace_back();
        int t = parent < 0 ? 0 : time_[parent] + 1;
        time_.push_back(t);
        if (parent >= 0) children_[parent].push_back(id);
        if (static_cast<int>(levels_.size()) <= t) levels_.resize(t + 1);
        levels_[t].push_back(id);
        bid_.push_back(std::move(bid));
        ask_.push_back(std::move(ask));
        payoff_.push_back(std::move(payoff));
        return id;
    }

    std::vector<int> parent_, time_;
    std::vector<std::vector<int>> children_, levels_;
    std::vector<R> bid_, ask_;
    std::vector<NodePayoff<R>> payoff_;
};

// Mixed (randomised) stopping time: non-negative mass per node summing to 1
// along every root-to-leaf path.
template <class R>
struct MixedStop {
    std::vector<R> mass;  // by node id
};

// Pure stopping time as its exercise antichain; stop[n] == 1 marks tau = t
// at node n. Every path hits exactly one marked node.
struct PureStop {
    std::vector<uint8_t> stop;

    template <class R>
    MixedStop<R> to_mixed() const {
        MixedStop<R> chi;
        chi.mass.assign(stop.size(), R(0));
        for (size_t n = 0; n < stop.size(); ++n)
            if (stop[n]) chi.mass[n] = R(1);
        return chi;
    }
};

template <class R>
bool is_valid_mixed_stop(const Model<R>& m, const MixedStop<R>& chi) {
    if (chi.mass.size() != static_cast<size_t>(m.num_nodes())) return false;
    for (const R& x : chi.mass)
        if (x < R(0)) return false;
    // path sums via leaf accumulation
    std::vector<R> acc(m.num_nodes(), R(0));
    for (int n = 0; n < m.num_nodes(); ++n)
        acc[n] = (m.parent(n) >= 0 ? acc[m.parent(n)] : R(0)) + chi.mass[n];
    for (int n = 0; n < m.num_nodes(); ++n)
        if (m.is_leaf(n) && !Arith<R>::close(acc[n], R(1))) return false;
    return true;
}

// chi*_t = sum_{s=t..T} chi_s along the path; adapted because it equals
// 1 - (mass spent strictly before t).
template <class R>
std::vector<R> chi_star(const Model<R>& m, const MixedStop<R>& chi) {
    std::vector<R> star(m.num_nodes());
    for (int n = 0; n < m.num_nodes(); ++n) {
        int p = m.parent(n);
        star[n] = p < 0 ? R(1) : star[p] - chi.mass[p];
    }
    return star;
}

// Z^{chi*}_t = sum_{s=t..T} chi_s Z_s computed by backward accumulation.
// Defined only when the tail sum is path-independent (it always is for
// chi* itself, i.e. Z == 1); otherwise reports failure.
template <class R>
std::optional<std::vector<R>> stopped_sum(const Model<R>& m, const MixedStop<R>& chi,
                                          const std::vector<R>& Z) {
    std::vector<R> out(m.num_nodes());
    for (int t = m.horizon(); t >= 0; --t) {
        for (int n : m.nodes_at(t)) {
            R tail(0);
            bool first = true;
            for (int c : m.children(n)) {
                if (first) {
                    tail = out[c];
                    first = false;
                } else if (!Arith<R>::close(tail, out[c])) {
                    return std::nullopt;  // not adapted
                }
            }
            out[n] = chi.mass[n] * Z[n] + tail;
        }
    }
    return out;
}

// Z_chi = sum_t chi_t Z_t as a per-leaf random variable.
template <class R>
std::vector<std::pair<int, R>> stopped_value(const Model<R>& m, const MixedStop<R>& chi,
                                             const std::vector<R>& Z) {
    std::vector<R> acc(m.num_nodes());
    std::vector<std::pair<int, R>> out;
    for (int n = 0; n < m.num_nodes(); ++n) {
        int p = m.parent(n);
        acc[n] = (p < 0 ? R(0) : acc[p]) + chi.mass[n] * Z[n];
        if (m.is_leaf(n)) out.emplace_back(n, acc[n]);
    }
    return out;
}

// Predictable portfolio process: (alpha_{t+1}, beta_{t+1}) is chosen at each
// non-terminal node and inherited by all its successors; (alpha_0, beta_0)
// lives at the root.
template <class R>
struct Strategy {
    CashShares<R> initial;
    std::vector<CashShares<R>> next;  // by node id; meaningful on non-leaves

    const CashShares<R>& entering(const Model<R>& m, int n) const {
        return n == 0 ? initial : next[m.parent(n)];
    }
};

// theta_t(gamma, delta): cash from closing the position at bid/ask.
template <class R>
R liquidation_value(const R& gamma, const R& delta, const R& bid, const R& ask) {
    if (ask < bid || !(bid > R(0))) throw InvalidSpreadError("liquidation_value: bad spread");
    return delta >= R(0) ? gamma + bid * delta : gamma + ask * delta;
}

template <class R>
R setup_cost(const R& gamma, const R& delta, const R& bid, const R& ask) {
    return -liquidation_value(R(-gamma), R(-delta), bid, ask);
}

template <class R>
struct SelfFinancingReport {
    bool ok = true;
    std::vector<std::pair<int, R>> violations;  // node, residual < 0
};

// theta_t(alpha_t - alpha_{t+1}, beta_t - beta_{t+1}) >= 0 at every node
// with a rebalancing step.
template <class R>
SelfFinancingReport<R> is_self_financing(const Model<R>& m, const Strategy<R>& s) {
    SelfFinancingReport<R> rep;
    for (int n = 0; n < m.num_nodes(); ++n) {
        if (m.is_leaf(n)) continue;
        const CashShares<R>& cur = s.entering(m, n);
        const CashShares<R>& nxt = s.next[n];
        R resid = liquidation_value(R(cur.cash - nxt.cash), R(cur.shares - nxt.shares),
                                    m.bid(n), m.ask(n));
        if (!Arith<R>::geq(resid, R(0))) {
            rep.ok = false;
            rep.violations.emplace_back(n, resid);
        }
    }
    return rep;
}

// Probability measure plus price process; prob[n] is the unconditional mass
// P_t(n). Equivalent pairs carry strictly positive masses everywhere.
template <class R>
struct MartingalePair {
    std::vector<R> prob;
    std::vector<R> price;
    bool equivalent = false;
};

template <class R>
struct MartingaleReport {
    bool ok = true;
    std::vector<std::pair<int, R>> residuals;  // node, worst violation
    void flag(int n, const R& r) {
        ok = false;
        residuals.emplace_back(n, r);
    }
};

// Checks (P, S) against the approximate-martingale conditions for chi:
//   S within [bid, ask] at every node, P consistent, and at every node with
//   P > 0:  chi*_{t+1} S^b <= E_P(S^{chi*}_{t+1} | F_t) <= chi*_{t+1} S^a.
template <class R>
MartingaleReport<R> verify_approx_martingale(const Model<R>& m, const MartingalePair<R>& ps,
                                             const MixedStop<R>& chi) {
    MartingaleReport<R> rep;
    const auto& P = ps.prob;
    const auto& S = ps.price;
    if (!Arith<R>::close(P[0], R(1))) rep.flag(0, P[0] - R(1));
    for (int n = 0; n < m.num_nodes(); ++n) {
        if (P[n] < R(0)) rep.flag(n, P[n]);
        if (ps.equivalent && !(P[n] > R(0))) rep.flag(n, P[n]);
        if (!Arith<R>::geq(S[n], m.bid(n)) || !Arith<R>::leq(S[n], m.ask(n)))
            rep.flag(n, S[n] - m.bid(n));
        if (!m.is_leaf(n)) {
            R csum(0);
            for (int c : m.children(n)) csum += P[c];
            if (!Arith<R>::close(csum, P[n])) rep.flag(n, csum - P[n]);
        }
    }
    std::vector<R> star = chi_star(m, chi);
    // tail[n] = E_P( sum_{s>=t} chi_s S_s | F_t ) * P[n], accumulated backward
    std::vector<R> tail(m.num_nodes(), R(0));
    for (int t = m.horizon(); t >= 0; --t) {
        for (int n : m.nodes_at(t)) {
            R below(0);
            for (int c : m.children(n)) below += tail[c];
            tail[n] = P[n] * chi.mass[n] * S[n] + below;
            if (!m.is_leaf(n) && P[n] > R(0)) {
                // conditional expectation of S^{chi*}_{t+1}
                R cond = below / P[n];
                R rem = star[n] - chi.mass[n];  // chi*_{t+1}
                if (rem < R(0)) rem = R(0);
                if (!Arith<R>::geq(cond, rem * m.bid(n))) rep.flag(n, cond - rem * m.bid(n));
                if (!Arith<R>::leq(cond, rem * m.ask(n))) rep.flag(n, cond - rem * m.ask(n));
            }
        }
    }
    return rep;
}

// E_P( (xi + S zeta)_chi ): expectation of the chi-stopped payoff value.
// Nodes with zero chi mass or zero probability contribute nothing, so
// NotExercisable nodes are skipped there.
template <class R>
R stopped_payoff_expectation(const Model<R>& m, const MartingalePair<R>& ps,
                             const MixedStop<R>& chi) {
    R total(0);
    for (int n = 0; n < m.num_nodes(); ++n) {
        if (chi.mass[n] == R(0) || ps.prob[n] == R(0)) continue;
        const auto& po = m.payoff(n);
        if (!po) throw ModelError("stopping mass on a NotExercisable node with P > 0");
        total += ps.prob[n] * chi.mass[n] * (po->cash + ps.price[n] * po->shares);
    }
    return total;
}

struct NoArbitrageResult {
    bool arbitrage_free = false;
    bool witness_equivalent = false;
};

// Backward interval recursion I_mu = [bid, ask] in conv(union of successor
// intervals); the model is arbitrage-free iff all intervals are non-empty.
// When possible a strictly positive witness measure is produced.
template <class R>
NoArbitrageResult no_arbitrage_check(const Model<R>& m, MartingalePair<R>* witness = nullptr) {
    int N = m.num_nodes();
    std::vector<R> lo(N), hi(N);
    for (int t = m.horizon(); t >= 0; --t) {
        for (int n : m.nodes_at(t)) {
            lo[n] = m.bid(n);
            hi[n] = m.ask(n);
            if (!m.is_leaf(n)) {
                bool first = true;
                R clo{}, chi2{};
                for (int c : m.children(n)) {
                    if (first) {
                        clo = lo[c];
                        chi2 = hi[c];
                        first = false;
                    } else {
                        clo = std::min(clo, lo[c]);
                        chi2 = std::max(chi2, hi[c]);
                    }
                }
                lo[n] = std::max(lo[n], clo);
                hi[n] = std::min(hi[n], chi2);
            }
            if (lo[n] > hi[n]) return {};
        }
    }
    NoArbitrageResult res;
    res.arbitrage_free = true;
    if (!witness) return res;
    // Construct S inside the intervals and conditional weights reproducing it.
    witness->prob.assign(N, R(0));
    witness->price.assign(N, R(0));
    bool all_positive = true;
    witness->prob[0] = R(1);
    witness->price[0] = (lo[0] + hi[0]) / R(2);
    for (int t = 0; t < m.horizon(); ++t) {
        for (int n : m.nodes_at(t)) {
            const R& s = witness->price[n];
            const auto& kids = m.children(n);
            R nkids = R(static_cast<long>(kids.size()));
            std::vector<R> rep(kids.size());
            R mn{}, mx{}, mean{0};
            auto rescan = [&] {
                mn = mx = rep[0];
                mean = R(0);
                for (const R& v : rep) {
                    mn = std::min(mn, v);
                    mx = std::max(mx, v);
                    mean += v;
                }
                mean /= nkids;
            };
            for (size_t i = 0; i < kids.size(); ++i)
                rep[i] = std::clamp(s, lo[kids[i]], hi[kids[i]]);
            rescan();
            // s on the edge of the clamped range but with room inside some
            // interval: move one representative off the edge so the weights
            // can stay strictly positive
            if (mn < mx) {
                if (s == mx) {
                    for (size_t i = 0; i < kids.size(); ++i) {
                        if (hi[kids[i]] > s) {
                            rep[i] = (s + hi[kids[i]]) / R(2);
                            break;
                        }
                    }
                }
                if (s == mn) {
                    for (size_t i = 0; i < kids.size(); ++i) {
                        if (lo[kids[i]] < s) {
                            rep[i] = (s + lo[kids[i]]) / R(2);
                            break;
                        }
                    }
                }
                rescan();
            }
            // weights: blend a two-point solution with the uniform one, with
            // the blend factor chosen so the mean stays reachable
            std::vector<R> q(kids.size(), R(0));
            if (mn == mx) {
                for (R& w : q) w = R(1) / nkids;
            } else {
                R theta(1);
                if (mean > mn) theta = std::min(theta, R((s - mn) / (mean - mn)));
                if (mean < mx) theta = std::min(theta, R((mx - s) / (mx - mean)));
                theta /= R(2);
                size_t imn = 0, imx = 0;
                for (size_t i = 0; i < kids.size(); ++i) {
                    if (rep[i] == mn) imn = i;
                    if (rep[i] == mx) imx = i;
                }
                R target = (s - theta * mean) / (R(1) - theta);
                target = std::clamp(target, mn, mx);
                R lam = (mx - target) / (mx - mn);  // weight on the min representative
                for (size_t i = 0; i < kids.size(); ++i) q[i] = theta / nkids;
                q[imn] += (R(1) - theta) * lam;
                q[imx] += (R(1) - theta) * (R(1) - lam);
            }
            for (size_t i = 0; i < kids.size(); ++i) {
                witness->prob[kids[i]] = witness->prob[n] * q[i];
                witness->price[kids[i]] = rep[i];
                if (!(q[i] > R(0))) all_positive = false;
            }
        }
    }
    witness->equivalent = all_positive;
    res.witness_equivalent = all_positive;
    return res;
}

}  // namespace bidask
