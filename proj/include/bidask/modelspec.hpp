#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bidask/arith.hpp"
#include "bidask/lattice.hpp"
#include "bidask/model.hpp"

namespace bidask {

// Declarative model description, version-headed text. Numbers are kept as
// strings so a tree model can be built exactly in rational mode.
//
//   bidask-model v1
//   model binomial            # binomial | trinomial | tree
//   S0 100
//   sigma 0.2
//   rate 0.1
//   maturity 0.25
//   steps 20
//   cost 0.005
//   no_cost_at_time0 on
//   never_exercise_step on
//   payoff put 100            # or: payoff calls 95:+1 105:-1
//
//   model tree
//   node 0 root bid 10 ask 10 payoff 0 0
//   node 1 parent 0 bid 8 ask 16 payoff 3 0
//   node 2 parent 0 bid 6 ask 6 none
struct ModelSpec {
    enum class Family { Binomial, Trinomial, Tree };
    enum class Instrument { None, Put, CallBasket };

    Family family = Family::Binomial;
    LatticeParams lattice;
    Instrument instrument = Instrument::None;
    double strike = 100.0;
    std::vector<std::pair<double, int>> legs;  // (strike, sign)

    struct NodeSpec {
        int id = 0;
        int parent = -1;  // -1 = root
        std::string bid, ask;
        bool exercisable = false;
        std::string cash, shares;
    };
    std::vector<NodeSpec> nodes;
};

ModelSpec parse_model_spec(std::istream& in);
ModelSpec parse_model_file(const std::string& path);

Lattice<double> build_lattice_model(const ModelSpec& spec);

// Builds the explicit event tree of a Family::Tree spec; numbers parse
// exactly in rational mode.
template <class R>
Model<R> build_tree_model(const ModelSpec& spec) {
    if (spec.family != ModelSpec::Family::Tree)
        throw ModelError("build_tree_model: spec does not describe a tree");
    Model<R> m;
    std::vector<int> idmap(spec.nodes.size(), -1);
    for (const auto& ns : spec.nodes) {
        NodePayoff<R> po;
        if (ns.exercisable)
            po = CashShares<R>{parse_number<R>(ns.cash), parse_number<R>(ns.shares)};
        int id;
        if (ns.parent < 0) {
            id = m.add_root(parse_number<R>(ns.bid), parse_number<R>(ns.ask), std::move(po));
        } else {
            if (ns.parent >= static_cast<int>(idmap.size()) || idmap[ns.parent] < 0)
                throw ModelError("tree node refers to an unknown parent");
            id = m.add_node(idmap[ns.parent], parse_number<R>(ns.bid), parse_number<R>(ns.ask),
                            std::move(po));
        }
        if (ns.id < 0 || ns.id >= static_cast<int>(idmap.size()))
            throw ModelError("tree node ids must be 0..n-1 in file order");
        idmap[ns.id] = id;
    }
    m.validate();
    return m;
}

}  // namespace bidask
