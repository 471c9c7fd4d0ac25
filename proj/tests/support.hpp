#pragma once

// Shared test helpers: deterministic random models/functions and the
// certificate identity checks used by both the unit and acceptance suites.

#include <random>
#include <string>
#include <vector>

#include "bidask/buyer.hpp"
#include "bidask/concave.hpp"
#include "bidask/model.hpp"
#include "bidask/plfunction.hpp"
#include "bidask/seller.hpp"

namespace testsup {

using bidask::Arith;
using bidask::CashShares;
using bidask::ConcavePL;
using bidask::ConvexPL;
using bidask::MixedStop;
using bidask::Model;
using bidask::PLFunction;
using bidask::Rational;

using Rng = std::mt19937_64;

inline long randint(Rng& g, long lo, long hi) {
    return std::uniform_int_distribution<long>(lo, hi)(g);
}

inline Rational randq(Rng& g, long lo_num, long hi_num, long max_den = 4) {
    return Rational(randint(g, lo_num, hi_num)) / Rational(randint(g, 1, max_den));
}

// Random convex function with up to max_bps breakpoints, small rational data.
template <class R>
ConvexPL<R> random_convex(Rng& g, int max_bps = 4) {
    int m = static_cast<int>(randint(g, 1, max_bps));
    std::vector<R> xs, ys, sl;
    R x = R(Arith<R>::fraction(randint(g, -8, 0), 2));
    for (int i = 0; i < m; ++i) {
        xs.push_back(x);
        x += R(Arith<R>::fraction(randint(g, 1, 6), 2));
    }
    R s = R(Arith<R>::fraction(randint(g, -20, 0), 2));
    for (int i = 0; i <= m; ++i) {
        sl.push_back(s);
        s += R(Arith<R>::fraction(randint(g, 1, 8), 2));
    }
    R y = R(Arith<R>::fraction(randint(g, -10, 10), 2));
    for (int i = 0; i < m; ++i) {
        ys.push_back(y);
        if (i + 1 < m) y += sl[i + 1] * (xs[i + 1] - xs[i]);
    }
    return ConvexPL<R>(PLFunction<R>::from_points(xs, ys, sl.front(), sl.back()));
}

// Random general piecewise linear function (usually non-convex).
template <class R>
PLFunction<R> random_pl(Rng& g, int max_bps = 5) {
    int m = static_cast<int>(randint(g, 1, max_bps));
    std::vector<R> xs, ys;
    R x = R(Arith<R>::fraction(randint(g, -8, 0), 2));
    for (int i = 0; i < m; ++i) {
        xs.push_back(x);
        x += R(Arith<R>::fraction(randint(g, 1, 6), 2));
        ys.push_back(R(Arith<R>::fraction(randint(g, -12, 12), 2)));
    }
    R sl = R(Arith<R>::fraction(randint(g, -12, 12), 2));
    R sr = R(Arith<R>::fraction(randint(g, -12, 12), 2));
    return PLFunction<R>::from_points(xs, ys, sl, sr);
}

template <class R>
ConcavePL<R> random_concave(Rng& g, int max_bps = 4) {
    int m = static_cast<int>(randint(g, 1, max_bps));
    std::vector<R> xs, ys, sl;
    R x = R(Arith<R>::fraction(randint(g, -6, 2), 2));
    for (int i = 0; i < m; ++i) {
        xs.push_back(x);
        x += R(Arith<R>::fraction(randint(g, 1, 5), 2));
    }
    R s = R(Arith<R>::fraction(randint(g, 2, 16), 2));
    for (int i = 0; i + 1 < m; ++i) {
        sl.push_back(s);
        s -= R(Arith<R>::fraction(randint(g, 1, 6), 2));
    }
    R y = R(Arith<R>::fraction(randint(g, -8, 8), 2));
    for (int i = 0; i < m; ++i) {
        ys.push_back(y);
        if (i + 1 < m) y += sl[i] * (xs[i + 1] - xs[i]);
    }
    return ConcavePL<R>::from_points(xs, ys);
}

struct TreeGenOptions {
    int depth = 3;
    int max_branch = 3;
    int exercisable_percent = 80;
    bool force_terminal_payoff = true;
    bool zero_spread = false;
};

// Arbitrage-free by construction: the mid-price process is a martingale for
// some strictly positive weights (successor values straddle the parent), and
// bid/ask bands contain it.
inline Model<Rational> random_tree(Rng& g, const TreeGenOptions& opt) {
    using Q = Rational;
    Model<Q> m;
    struct Item {
        int node;
        Q mid;
        int depth;
    };
    auto payoff_at = [&](bool terminal) -> bidask::NodePayoff<Q> {
        if (!terminal && randint(g, 1, 100) > opt.exercisable_percent) return std::nullopt;
        if (terminal && !opt.force_terminal_payoff && randint(g, 1, 100) > opt.exercisable_percent)
            return std::nullopt;
        Q xi = randq(g, -10, 20, 2);
        Q zeta = Q(randint(g, -2, 2)) / 2;
        return CashShares<Q>{xi, zeta};
    };
    auto band = [&](const Q& mid) {
        Q kb = opt.zero_spread ? Q(0) : Q(randint(g, 0, 8)) / 40;
        Q ka = opt.zero_spread ? Q(0) : Q(randint(g, 0, 8)) / 40;
        return std::pair<Q, Q>{mid * (Q(1) - kb), mid * (Q(1) + ka)};
    };
    Q s0 = Q(randint(g, 6, 14));
    auto [b0, a0] = band(s0);
    int root = m.add_root(b0, a0, payoff_at(opt.depth == 0));
    std::vector<Item> frontier{{root, s0, 0}};
    while (!frontier.empty()) {
        std::vector<Item> next;
        for (const auto& it : frontier) {
            if (it.depth == opt.depth) continue;
            int nb = static_cast<int>(randint(g, 1, opt.max_branch));
            std::vector<Q> mids(nb);
            if (nb == 1) {
                mids[0] = it.mid;
            } else {
                mids[0] = it.mid * Q(randint(g, 21, 30)) / 20;  // strictly above
                mids[1] = it.mid * Q(randint(g, 10, 19)) / 20;  // strictly below
                for (int j = 2; j < nb; ++j) mids[j] = it.mid * Q(randint(g, 10, 30)) / 20;
            }
            for (int j = 0; j < nb; ++j) {
                auto [b, a] = band(mids[j]);
                int id = m.add_node(it.node, b, a, payoff_at(it.depth + 1 == opt.depth));
                next.push_back({id, mids[j], it.depth + 1});
            }
        }
        frontier = std::move(next);
    }
    m.validate();
    return m;
}

template <class R>
Model<R> convert_model(const Model<Rational>& src) {
    Model<R> dst;
    for (int n = 0; n < src.num_nodes(); ++n) {
        bidask::NodePayoff<R> po;
        if (src.payoff(n))
            po = CashShares<R>{R(Arith<Rational>::to_double(src.payoff(n)->cash)),
                               R(Arith<Rational>::to_double(src.payoff(n)->shares))};
        R bid = R(Arith<Rational>::to_double(src.bid(n)));
        R ask = R(Arith<Rational>::to_double(src.ask(n)));
        if (n == 0)
            dst.add_root(bid, ask, po);
        else
            dst.add_node(src.parent(n), bid, ask, po);
    }
    return dst;
}

template <>
inline Model<Rational> convert_model<Rational>(const Model<Rational>& src) {
    return src;
}

// Random mixed stopping time: split the remaining mass at every node.
template <class R>
MixedStop<R> random_mixed_stop(Rng& g, const Model<R>& m) {
    MixedStop<R> chi;
    chi.mass.assign(m.num_nodes(), R(0));
    std::vector<R> rem(m.num_nodes(), R(0));
    rem[0] = R(1);
    for (int t = 0; t <= m.horizon(); ++t) {
        for (int n : m.nodes_at(t)) {
            if (m.is_leaf(n)) {
                chi.mass[n] = rem[n];
            } else {
                R frac = R(Arith<R>::fraction(randint(g, 0, 4), 4));
                chi.mass[n] = rem[n] * frac;
                for (int c : m.children(n)) rem[c] = rem[n] - chi.mass[n];
            }
        }
    }
    return chi;
}

using bidask::certificate_identities_hold;

}  // namespace testsup
