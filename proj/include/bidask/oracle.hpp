#pragma once

#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "bidask/buyer.hpp"
#include "bidask/model.hpp"
#include "bidask/seller.hpp"

namespace bidask {

enum class LPStatus { Optimal, Infeasible, Unbounded };

// Dense two-phase tableau simplex with Bland's rule, exact over rationals.
// Small instances only; kept independent of the pricing recursions.
template <class R>
class SimplexSolver {
public:
    // min c'x  s.t.  A x = b, x >= 0  (rows already equality-form)
    SimplexSolver(std::vector<std::vector<R>> A, std::vector<R> b, std::vector<R> c)
        : A_(std::move(A)), b_(std::move(b)), c_(std::move(c)) {}

    LPStatus solve() {
        size_t m = A_.size(), n = c_.size();
        for (size_t i = 0; i < m; ++i) {
            if (b_[i] < R(0)) {
                for (auto& a : A_[i]) a = -a;
                b_[i] = -b_[i];
            }
        }
        size_t total = n + m;  // structurals + artificials
        D_.assign(m, std::vector<R>(total + 1, R(0)));
        basis_.resize(m);
        for (size_t i = 0; i < m; ++i) {
            for (size_t j = 0; j < n; ++j) D_[i][j] = A_[i][j];
            D_[i][n + i] = R(1);
            D_[i][total] = b_[i];
            basis_[i] = n + i;
        }
        // phase 1: minimise the sum of artificials
        z_.assign(total + 1, R(0));
        for (size_t j = n; j < total; ++j) z_[j] = R(1);
        for (size_t i = 0; i < m; ++i)
            for (size_t j = 0; j <= total; ++j) z_[j] -= D_[i][j];
        if (!iterate(total)) return LPStatus::Unbounded;  // cannot happen in phase 1
        if (-z_[total] > R(0)) return LPStatus::Infeasible;
        for (size_t i = 0; i < m; ++i) {
            if (basis_[i] < n) continue;  // structural basic
            for (size_t j = 0; j < n; ++j) {
                if (D_[i][j] != R(0)) {
                    pivot(i, j);
                    break;
                }
            }
            // redundant all-zero rows simply stay inert
        }
        // phase 2
        z_.assign(total + 1, R(0));
        for (size_t j = 0; j < n; ++j) z_[j] = c_[j];
        for (size_t i = 0; i < m; ++i) {
            if (basis_[i] >= n || c_[basis_[i]] == R(0)) continue;
            const R cb = c_[basis_[i]];
            for (size_t j = 0; j <= total; ++j) z_[j] -= cb * D_[i][j];
        }
        if (!iterate(n)) return LPStatus::Unbounded;
        x_.assign(n, R(0));
        for (size_t i = 0; i < m; ++i)
            if (basis_[i] < n) x_[basis_[i]] = D_[i].back();
        value_ = -z_.back();
        return LPStatus::Optimal;
    }

    const std::vector<R>& solution() const { return x_; }
    const R& objective() const { return value_; }

private:
    // Bland's rule; columns < limit are eligible to enter.
    bool iterate(size_t limit) {
        size_t m = D_.size();
        for (;;) {
            size_t enter = limit;
            for (size_t j = 0; j < limit; ++j) {
                if (z_[j] < R(0)) {
                    enter = j;
                    break;
                }
            }
            if (enter == limit) return true;
            size_t leave = m;
            for (size_t i = 0; i < m; ++i) {
                if (D_[i][enter] <= R(0)) continue;
                if (leave == m) {
                    leave = i;
                    continue;
                }
                R lhs = D_[i].back() * D_[leave][enter];
                R rhs = D_[leave].back() * D_[i][enter];
                if (lhs < rhs || (lhs == rhs && basis_[i] < basis_[leave])) leave = i;
            }
            if (leave == m) return false;
            pivot(leave, enter);
        }
    }

    void pivot(size_t row, size_t col) {
        R piv = D_[row][col];
        for (auto& v : D_[row]) v /= piv;
        for (size_t i = 0; i < D_.size(); ++i) {
            if (i == row || D_[i][col] == R(0)) continue;
            R f = D_[i][col];
            for (size_t j = 0; j < D_[i].size(); ++j) D_[i][j] -= f * D_[row][j];
        }
        if (z_[col] != R(0)) {
            R f = z_[col];
            for (size_t j = 0; j < z_.size(); ++j) z_[j] -= f * D_[row][j];
        }
        basis_[row] = col;
    }

    std::vector<std::vector<R>> A_;
    std::vector<R> b_, c_;
    std::vector<std::vector<R>> D_;
    std::vector<R> z_, x_;
    std::vector<size_t> basis_;
    R value_{};
};

// Convenience layer: free variables, <=/==/>= rows, min or max objectives.
template <class R>
class LinearProgram {
public:
    int add_var(bool nonneg) {
        vars_.push_back(static_cast<int>(ncols_));
        ncols_ += nonneg ? 1 : 2;  // free variables split into +/- parts
        nonneg_.push_back(nonneg);
        return static_cast<int>(vars_.size()) - 1;
    }

    // rel: -1 for <=, 0 for ==, +1 for >=
    void add_constraint(std::vector<std::pair<int, R>> terms, int rel, R rhs) {
        rows_.push_back({std::move(terms), rel, std::move(rhs)});
    }

    void set_objective(std::vector<std::pair<int, R>> terms, bool minimize) {
        obj_ = std::move(terms);
        minimize_ = minimize;
    }

    struct Result {
        LPStatus status;
        R value{};
        std::vector<R> x;
    };

    Result solve() const {
        size_t n = ncols_ + rows_.size();  // columns incl. one slack slot per row
        std::vector<std::vector<R>> A(rows_.size(), std::vector<R>(n, R(0)));
        std::vector<R> b(rows_.size());
        std::vector<R> c(n, R(0));
        size_t slack = ncols_;
        for (size_t i = 0; i < rows_.size(); ++i) {
            for (const auto& [v, coef] : rows_[i].terms) scatter(A[i], v, coef);
            if (rows_[i].rel != 0) A[i][slack] = rows_[i].rel > 0 ? R(-1) : R(1);
            ++slack;
            b[i] = rows_[i].rhs;
        }
        for (const auto& [v, coef] : obj_) scatter(c, v, minimize_ ? coef : -coef);
        SimplexSolver<R> s(std::move(A), std::move(b), std::move(c));
        Result res;
        res.status = s.solve();
        if (res.status != LPStatus::Optimal) return res;
        res.value = minimize_ ? s.objective() : -s.objective();
        res.x.resize(vars_.size());
        for (size_t v = 0; v < vars_.size(); ++v) {
            if (nonneg_[v])
                res.x[v] = s.solution()[vars_[v]];
            else
                res.x[v] = s.solution()[vars_[v]] - s.solution()[vars_[v] + 1];
        }
        return res;
    }

private:
    void scatter(std::vector<R>& row, int v, const R& coef) const {
        if (nonneg_[v]) {
            row[vars_[v]] += coef;
        } else {
            row[vars_[v]] += coef;
            row[vars_[v] + 1] -= coef;
        }
    }

    struct Row {
        std::vector<std::pair<int, R>> terms;
        int rel;
        R rhs;
    };

    std::vector<int> vars_;  // var id -> first column
    std::vector<bool> nonneg_;
    size_t ncols_ = 0;
    std::vector<Row> rows_;
    std::vector<std::pair<int, R>> obj_;
    bool minimize_ = true;
};

namespace detail {

// theta(gamma, delta) >= 0 is equivalent to the pair of linear constraints
// gamma + bid*delta >= 0 and gamma + ask*delta >= 0.
template <class R>
void add_solvency(LinearProgram<R>& lp, std::vector<std::pair<int, R>> gamma_terms,
                  std::vector<std::pair<int, R>> delta_terms, const R& bid, const R& ask,
                  const R& rhs) {
    for (const R* px : {&bid, &ask}) {
        std::vector<std::pair<int, R>> row = gamma_terms;
        for (const auto& [v, coef] : delta_terms) row.emplace_back(v, coef * (*px));
        lp.add_constraint(std::move(row), +1, rhs);
    }
}

}  // namespace detail

template <class R>
struct OracleSellerResult {
    R price{};
    Strategy<R> strategy;
};

// Seller's price straight from its definition: minimise the setup cost over
// predictable strategies subject to the self-financing constraints and the
// delivery constraint at every exercisable node.
template <class R>
OracleSellerResult<R> oracle_seller_price(const Model<R>& m, size_t node_budget = 200) {
    if (static_cast<size_t>(m.num_nodes()) > node_budget)
        throw BudgetError("oracle_seller_price: tree exceeds node budget");
    LinearProgram<R> lp;
    int a0 = lp.add_var(false), b0 = lp.add_var(false);
    int bpos = lp.add_var(true), bneg = lp.add_var(true);  // beta_0 = bpos - bneg
    lp.add_constraint({{b0, R(1)}, {bpos, R(-1)}, {bneg, R(1)}}, 0, R(0));
    std::vector<int> vc(m.num_nodes(), -1), vs(m.num_nodes(), -1);
    for (int n = 0; n < m.num_nodes(); ++n) {
        if (!m.is_leaf(n)) {
            vc[n] = lp.add_var(false);
            vs[n] = lp.add_var(false);
        }
    }
    auto entering = [&](int n) -> std::pair<int, int> {
        if (n == 0) return {a0, b0};
        return {vc[m.parent(n)], vs[m.parent(n)]};
    };
    for (int n = 0; n < m.num_nodes(); ++n) {
        auto [ec, es] = entering(n);
        if (!m.is_leaf(n)) {
            detail::add_solvency(lp, {{ec, R(1)}, {vc[n], R(-1)}},
                                 {{es, R(1)}, {vs[n], R(-1)}}, m.bid(n), m.ask(n), R(0));
        }
        if (m.exercisable(n)) {
            const auto& po = *m.payoff(n);
            // (entering cash - xi) + price * (entering shares - zeta) >= 0
            for (const R* px : {&m.bid(n), &m.ask(n)}) {
                lp.add_constraint({{ec, R(1)}, {es, *px}}, +1, po.cash + *px * po.shares);
            }
        }
    }
    lp.set_objective({{a0, R(1)}, {bpos, m.ask(0)}, {bneg, -m.bid(0)}}, true);
    auto res = lp.solve();
    if (res.status == LPStatus::Infeasible)
        throw ModelError("oracle_seller_price: infeasible (degenerate payoff)");
    if (res.status == LPStatus::Unbounded)
        throw ModelError("oracle_seller_price: unbounded (model admits arbitrage)");
    OracleSellerResult<R> out;
    out.price = res.value;
    out.strategy.initial = {res.x[a0], res.x[b0]};
    out.strategy.next.resize(m.num_nodes());
    for (int n = 0; n < m.num_nodes(); ++n)
        if (!m.is_leaf(n)) out.strategy.next[n] = {res.x[vc[n]], res.x[vs[n]]};
    return out;
}

namespace detail {

// Most cash the buyer can raise when committed to exercising at the nodes of
// `st`: one linear program over the strategy variables alive before the stop.
template <class R>
std::optional<R> buyer_lp_value(const Model<R>& m, const PureStop& st) {
    std::vector<uint8_t> alive(m.num_nodes(), 0);
    LinearProgram<R> lp;
    int a0 = lp.add_var(false), b0 = lp.add_var(false);
    int bpos = lp.add_var(true), bneg = lp.add_var(true);
    lp.add_constraint({{b0, R(1)}, {bpos, R(-1)}, {bneg, R(1)}}, 0, R(0));
    std::vector<int> vc(m.num_nodes(), -1), vs(m.num_nodes(), -1);
    for (int n = 0; n < m.num_nodes(); ++n) {
        alive[n] = !st.stop[n] && (n == 0 || alive[m.parent(n)]);
        if (alive[n]) {
            vc[n] = lp.add_var(false);
            vs[n] = lp.add_var(false);
        }
    }
    auto entering = [&](int n) -> std::pair<int, int> {
        if (n == 0) return {a0, b0};
        return {vc[m.parent(n)], vs[m.parent(n)]};
    };
    for (int n = 0; n < m.num_nodes(); ++n) {
        bool reachable = n == 0 || alive[m.parent(n)];
        if (!reachable) continue;
        auto [ec, es] = entering(n);
        if (alive[n]) {
            add_solvency(lp, {{ec, R(1)}, {vc[n], R(-1)}}, {{es, R(1)}, {vs[n], R(-1)}},
                         m.bid(n), m.ask(n), R(0));
        } else {  // stopped here: exercise solvency with payoff received
            const auto& po = *m.payoff(n);
            for (const R* px : {&m.bid(n), &m.ask(n)}) {
                lp.add_constraint({{ec, R(1)}, {es, *px}}, +1, -(po.cash + *px * po.shares));
            }
        }
    }
    lp.set_objective({{a0, R(1)}, {bpos, m.ask(0)}, {bneg, -m.bid(0)}}, true);
    auto res = lp.solve();
    if (res.status == LPStatus::Unbounded)
        throw ModelError("buyer oracle: unbounded (model admits arbitrage)");
    if (res.status != LPStatus::Optimal) return std::nullopt;
    return R(-res.value);
}

}  // namespace detail

// Raise the most cash now such that some pure stopping time leaves a solvent
// position: enumerate stopping times, one LP each.
template <class R>
R oracle_buyer_price(const Model<R>& m, size_t node_budget = 200, size_t stop_budget = 100000) {
    if (static_cast<size_t>(m.num_nodes()) > node_budget)
        throw BudgetError("oracle_buyer_price: tree exceeds node budget");
    auto stops = enumerate_pure_stops(m, stop_budget);
    if (stops.empty()) throw ModelError("oracle_buyer_price: payoff not exercisable on some path");
    bool have = false;
    R best{};
    for (const auto& st : stops) {
        auto raised = detail::buyer_lp_value(m, st);
        if (!raised) continue;
        if (!have || *raised > best) {
            best = *raised;
            have = true;
        }
    }
    if (!have) throw ModelError("oracle_buyer_price: no feasible stopping time");
    return best;
}

// One-sided bound for trees whose stopping times cannot be enumerated: the
// best LP value over randomly sampled pure stopping times. Never exceeds the
// true bid price.
template <class R>
R oracle_buyer_price_sampled(const Model<R>& m, size_t samples, uint64_t seed,
                             size_t node_budget = 200) {
    if (static_cast<size_t>(m.num_nodes()) > node_budget)
        throw BudgetError("oracle_buyer_price_sampled: tree exceeds node budget");
    std::mt19937_64 g(seed);
    std::bernoulli_distribution flip(0.5);
    bool have = false;
    R best{};
    for (size_t s = 0; s < samples; ++s) {
        PureStop st;
        st.stop.assign(m.num_nodes(), 0);
        std::vector<uint8_t> stopped(m.num_nodes(), 0);
        bool valid = true;
        for (int n = 0; n < m.num_nodes() && valid; ++n) {
            if (n > 0 && stopped[m.parent(n)]) {
                stopped[n] = 1;  // below an exercise node
                continue;
            }
            bool must = m.is_leaf(n);
            if (m.exercisable(n) && (must || flip(g))) {
                st.stop[n] = 1;
                stopped[n] = 1;
            } else if (must) {
                valid = false;  // path ends unexercised
            }
        }
        if (!valid) continue;
        auto raised = detail::buyer_lp_value(m, st);
        if (raised && (!have || *raised > best)) {
            best = *raised;
            have = true;
        }
    }
    if (!have) throw ModelError("oracle_buyer_price_sampled: no feasible sample");
    return best;
}

// Extremal expectation of the chi-stopped payoff over approximate
// martingales (P, S) in Pbar(chi), as a linear program in (q, r) = (P, P*S).
template <class R>
R extremal_expectation(const Model<R>& m, const MixedStop<R>& chi, bool maximize) {
    std::vector<R> star = chi_star(m, chi);
    LinearProgram<R> lp;
    int N = m.num_nodes();
    std::vector<int> q(N), r(N), d(N);
    for (int n = 0; n < N; ++n) {
        q[n] = lp.add_var(true);
        r[n] = lp.add_var(true);
        d[n] = lp.add_var(true);
    }
    lp.add_constraint({{q[0], R(1)}}, 0, R(1));
    std::vector<std::pair<int, R>> obj;
    for (int n = 0; n < N; ++n) {
        // bid * q <= r <= ask * q
        lp.add_constraint({{r[n], R(1)}, {q[n], -m.bid(n)}}, +1, R(0));
        lp.add_constraint({{q[n], m.ask(n)}, {r[n], R(-1)}}, +1, R(0));
        // d_n = chi_n r_n + sum_children d_c
        std::vector<std::pair<int, R>> row{{d[n], R(1)}, {r[n], -chi.mass[n]}};
        for (int c : m.children(n)) row.emplace_back(d[c], R(-1));
        lp.add_constraint(std::move(row), 0, R(0));
        if (!m.is_leaf(n)) {
            // measure consistency
            std::vector<std::pair<int, R>> cons{{q[n], R(1)}};
            for (int c : m.children(n)) cons.emplace_back(q[c], R(-1));
            lp.add_constraint(std::move(cons), 0, R(0));
            // chi*_{t+1} bid q <= E(S^{chi*}_{t+1}) <= chi*_{t+1} ask q,
            // where the middle term is d_n - chi_n r_n
            R rem = star[n] - chi.mass[n];
            lp.add_constraint({{d[n], R(1)}, {r[n], -chi.mass[n]}, {q[n], -rem * m.bid(n)}},
                              +1, R(0));
            lp.add_constraint({{q[n], rem * m.ask(n)}, {d[n], R(-1)}, {r[n], chi.mass[n]}},
                              +1, R(0));
        }
        if (chi.mass[n] != R(0)) {
            if (!m.exercisable(n))
                throw ModelError("extremal_expectation: chi mass on NotExercisable node");
            const auto& po = *m.payoff(n);
            obj.emplace_back(q[n], chi.mass[n] * po.cash);
            obj.emplace_back(r[n], chi.mass[n] * po.shares);
        }
    }
    lp.set_objective(std::move(obj), !maximize);
    auto res = lp.solve();
    if (res.status != LPStatus::Optimal)
        throw ModelError("extremal_expectation: LP not solvable");
    return res.value;
}

// Classical frictionless Snell envelope; requires zero spreads and unique
// risk-neutral one-step weights (at most two distinct successor prices).
template <class R, class View>
R snell_value_view(const View& mv) {
    int T = mv.horizon();
    std::vector<R> next;
    for (int t = T; t >= 0; --t) {
        std::vector<R> cur(mv.width(t));
        for (int i = 0; i < mv.width(t); ++i) {
            if (!Arith<R>::close(mv.bid_at(t, i), mv.ask_at(t, i)))
                throw ModelError("snell_envelope: nonzero spread");
            const R& s = mv.bid_at(t, i);
            const auto& po = mv.payoff_at(t, i);
            R ex{};
            bool has_ex = po.has_value();
            if (has_ex) ex = po->cash + po->shares * s;
            if (t == T) {
                if (!has_ex) throw ModelError("snell_envelope: leaf without payoff");
                cur[i] = ex;
            } else {
                int k = mv.nsucc(t, i);
                R cont{};
                if (k == 1) {
                    int c = mv.succ(t, i, 0);
                    if (!Arith<R>::close(mv.bid_at(t + 1, c), s))
                        throw ModelError("snell_envelope: price jump without branching");
                    cont = next[c];
                } else if (k == 2) {
                    int cd = mv.succ(t, i, 0), cu = mv.succ(t, i, 1);
                    const R& sd = mv.bid_at(t + 1, cd);
                    const R& su = mv.bid_at(t + 1, cu);
                    if (Arith<R>::close(su, sd))
                        throw ModelError("snell_envelope: degenerate branching");
                    R p = (s - sd) / (su - sd);
                    if (p < R(0) || p > R(1))
                        throw ModelError("snell_envelope: price outside successor range");
                    cont = p * next[cu] + (R(1) - p) * next[cd];
                } else {
                    throw ModelError("snell_envelope: incomplete lattice (three successors)");
                }
                cur[i] = has_ex ? std::max(ex, cont) : cont;
            }
        }
        next = std::move(cur);
    }
    return next[0];
}

template <class R>
R snell_envelope(const Model<R>& m) {
    return snell_value_view<R>(TreeLevelView<R>(m));
}

inline double snell_envelope(const Lattice<double>& lat) {
    return snell_value_view<double>(lat);
}

// Blend (Pbar, Sbar) in Pbar(chi) with an equivalent true martingale pair to
// obtain an equivalent approximate martingale whose expectation moves by less
// than delta: P = (1-eps) Pbar + eps P_eq with the matching price blend.
template <class R>
MartingalePair<R> perturb_to_equivalent(const Model<R>& m, const MartingalePair<R>& bar,
                                        const MartingalePair<R>& eq, const MixedStop<R>& chi,
                                        const R& delta) {
    if (!(delta > R(0))) throw ModelError("perturb_to_equivalent: delta must be positive");
    for (const R& p : eq.prob)
        if (!(p > R(0)))
            throw ModelError("perturb_to_equivalent: second pair is not equivalent");
    R ebar = stopped_payoff_expectation(m, bar, chi);
    R eeq = stopped_payoff_expectation(m, eq, chi);
    R gap = eeq >= ebar ? eeq - ebar : ebar - eeq;
    R eps = gap == R(0) ? R(1) / R(2) : R(std::min(R(1), R(delta / gap)) / R(2));
    MartingalePair<R> out;
    out.equivalent = true;
    int N = m.num_nodes();
    out.prob.resize(N);
    out.price.resize(N);
    for (int n = 0; n < N; ++n) {
        out.prob[n] = (R(1) - eps) * bar.prob[n] + eps * eq.prob[n];
        out.price[n] =
            ((R(1) - eps) * bar.price[n] * bar.prob[n] + eps * eq.price[n] * eq.prob[n]) /
            out.prob[n];
    }
    return out;
}

}  // namespace bidask
