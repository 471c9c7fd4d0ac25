#pragma once

#include <cmath>
#include <vector>

#include "bidask/model.hpp"

namespace bidask {

// Recombinant binomial/trinomial lattice with one logical node per
// (time, level). Prices are stored discounted; mid keeps the raw
// (undiscounted) lattice price used by cash-settled payoffs. An appended
// Copy step models the option that is never exercised: payoff (0,0) and
// prices copied from the parents.
template <class R = double>
struct Lattice {
    enum class Step { Binomial, Trinomial, Copy };

    std::vector<Step> steps;                     // connects level t to t+1
    std::vector<std::vector<R>> bid, ask, mid;   // per (t, i)
    std::vector<std::vector<NodePayoff<R>>> payoff;
    std::vector<R> disc;                         // discount factor per level

    int horizon() const { return static_cast<int>(bid.size()) - 1; }
    int width(int t) const { return static_cast<int>(bid[t].size()); }

    int nsucc(int t, int /*i*/) const {
        switch (steps[t]) {
            case Step::Binomial: return 2;
            case Step::Trinomial: return 3;
            default: return 1;
        }
    }
    int succ(int /*t*/, int i, int j) const { return i + j; }

    const R& bid_at(int t, int i) const { return bid[t][i]; }
    const R& ask_at(int t, int i) const { return ask[t][i]; }
    const NodePayoff<R>& payoff_at(int t, int i) const { return payoff[t][i]; }
};

// Level-indexed view over a Model tree exposing the same interface as a
// Lattice, so the pricing recursions run on either.
template <class R>
class TreeLevelView {
public:
    explicit TreeLevelView(const Model<R>& m) : m_(&m), pos_(m.num_nodes()) {
        for (const auto& lvl : m.levels())
            for (size_t i = 0; i < lvl.size(); ++i) pos_[lvl[i]] = static_cast<int>(i);
    }

    int horizon() const { return m_->horizon(); }
    int width(int t) const { return static_cast<int>(m_->nodes_at(t).size()); }
    int node(int t, int i) const { return m_->nodes_at(t)[i]; }
    const R& bid_at(int t, int i) const { return m_->bid(node(t, i)); }
    const R& ask_at(int t, int i) const { return m_->ask(node(t, i)); }
    const NodePayoff<R>& payoff_at(int t, int i) const { return m_->payoff(node(t, i)); }
    int nsucc(int t, int i) const {
        return static_cast<int>(m_->children(node(t, i)).size());
    }
    int succ(int t, int i, int j) const { return pos_[m_->children(node(t, i))[j]]; }

private:
    const Model<R>* m_;
    std::vector<int> pos_;
};

struct LatticeParams {
    double S0 = 100.0;
    double sigma = 0.2;
    double maturity = 0.25;  // years
    double rate = 0.1;       // continuously compounded
    int steps = 20;
    double cost = 0.0;       // transaction cost rate k
    bool no_cost_at_time0 = true;
    bool never_exercise_step = true;
};

namespace detail {

inline Lattice<double> build_lattice(const LatticeParams& p, bool trinomial) {
    if (p.S0 <= 0 || p.sigma <= 0 || p.steps < 1) throw ModelError("bad lattice parameters");
    if (p.cost < 0 || p.cost >= 1) throw ModelError("transaction cost rate must be in [0,1)");
    double dt = p.maturity / p.steps;
    double up = std::exp(p.sigma * std::sqrt(dt));
    int N = p.steps;
    Lattice<double> lat;
    int levels = N + 1 + (p.never_exercise_step ? 1 : 0);
    lat.bid.resize(levels);
    lat.ask.resize(levels);
    lat.mid.resize(levels);
    lat.payoff.resize(levels);
    lat.disc.resize(levels);
    lat.steps.assign(levels - 1, trinomial ? Lattice<double>::Step::Trinomial
                                           : Lattice<double>::Step::Binomial);
    if (p.never_exercise_step) lat.steps.back() = Lattice<double>::Step::Copy;
    for (int t = 0; t <= N; ++t) {
        int w = trinomial ? 2 * t + 1 : t + 1;
        lat.disc[t] = std::exp(-p.rate * t * dt);
        lat.mid[t].resize(w);
        lat.bid[t].resize(w);
        lat.ask[t].resize(w);
        lat.payoff[t].assign(w, std::nullopt);
        for (int i = 0; i < w; ++i) {
            double expo = trinomial ? double(i - t) : double(2 * i - t);
            double s = p.S0 * std::pow(up, expo);
            lat.mid[t][i] = s;
            double ds = s * lat.disc[t];
            if (t == 0 && p.no_cost_at_time0) {
                lat.bid[t][i] = lat.ask[t][i] = ds;
            } else {
                lat.bid[t][i] = (1.0 - p.cost) * ds;
                lat.ask[t][i] = (1.0 + p.cost) * ds;
            }
        }
    }
    if (p.never_exercise_step) {
        int t = N + 1;
        lat.disc[t] = lat.disc[N];
        lat.mid[t] = lat.mid[N];
        lat.bid[t] = lat.bid[N];
        lat.ask[t] = lat.ask[N];
        lat.payoff[t].assign(lat.mid[t].size(), CashShares<double>{0.0, 0.0});
    }
    return lat;
}

}  // namespace detail

inline Lattice<double> build_binomial(const LatticeParams& p) {
    return detail::build_lattice(p, false);
}

inline Lattice<double> build_trinomial(const LatticeParams& p) {
    return detail::build_lattice(p, true);
}

// Physical-delivery American put: portfolio (K, -1), cash leg discounted.
// The appended Copy level keeps its (0,0) payoff.
template <class R>
void set_put_payoff(Lattice<R>& lat, const R& strike) {
    int last = lat.horizon();
    if (!lat.steps.empty() && lat.steps.back() == Lattice<R>::Step::Copy) --last;
    for (int t = 0; t <= last; ++t)
        for (int i = 0; i < lat.width(t); ++i)
            lat.payoff[t][i] = CashShares<R>{strike * lat.disc[t], R(-1)};
}

// Cash-settled basket of calls: xi = disc * sum sign_j (S_t - K_j)^+ from the
// undiscounted mid price, zeta = 0.
template <class R>
void set_cash_basket_payoff(Lattice<R>& lat, const std::vector<std::pair<R, int>>& legs) {
    int last = lat.horizon();
    if (!lat.steps.empty() && lat.steps.back() == Lattice<R>::Step::Copy) --last;
    for (int t = 0; t <= last; ++t) {
        for (int i = 0; i < lat.width(t); ++i) {
            R v(0);
            for (const auto& [strike, sign] : legs) {
                if (lat.mid[t][i] > strike)
                    v += R(sign) * (lat.mid[t][i] - strike);
            }
            lat.payoff[t][i] = CashShares<R>{v * lat.disc[t], R(0)};
        }
    }
}

// Expand the lattice into an explicit event tree (paths become atoms);
// needed for hedges and certificates, which are path-dependent. Throws when
// the expansion exceeds max_nodes.
template <class R>
Model<R> expand_to_tree(const Lattice<R>& lat, size_t max_nodes = 2'000'000) {
    Model<R> m;
    struct Item {
        int node;
        int level_index;
    };
    std::vector<Item> frontier;
    m.add_root(lat.bid[0][0], lat.ask[0][0], lat.payoff[0][0]);
    frontier.push_back({0, 0});
    size_t total = 1;
    for (int t = 0; t < lat.horizon(); ++t) {
        std::vector<Item> next;
        for (const auto& it : frontier) {
            for (int j = 0; j < lat.nsucc(t, it.level_index); ++j) {
                int li = lat.succ(t, it.level_index, j);
                if (++total > max_nodes) throw BudgetError("lattice expansion too large");
                int id = m.add_node(it.node, lat.bid[t + 1][li], lat.ask[t + 1][li],
                                    lat.payoff[t + 1][li]);
                next.push_back({id, li});
            }
        }
        frontier = std::move(next);
    }
    return m;
}

}  // namespace bidask
