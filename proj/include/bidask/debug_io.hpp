#pragma once

#include <sstream>
#include <string>

#include "bidask/concave.hpp"
#include "bidask/model.hpp"
#include "bidask/plfunction.hpp"

namespace bidask {

// Text forms for test fixtures and debugging; stable, human-diffable.

template <class R>
std::string to_string(const PLFunction<R>& f) {
    switch (f.kind()) {
        case FnKind::Bottom: return "bottom";
        case FnKind::Top: return "top";
        case FnKind::UnboundedBelow: return "unbounded-below";
        default: break;
    }
    std::ostringstream os;
    os << "pl slopes " << f.left_slope();
    for (size_t i = 0; i < f.size(); ++i)
        os << " (" << f.breakpoints()[i] << "," << f.values()[i] << ") "
           << f.segment_slope(i + 1);
    return os.str();
}

template <class R>
std::string to_string(const ConvexPL<R>& f) {
    return to_string(f.fn());
}

template <class R>
std::string to_string(const ConcavePL<R>& v) {
    if (v.is_bottom()) return "bottom";
    std::ostringstream os;
    os << "concave";
    for (size_t i = 0; i < v.size(); ++i)
        os << " (" << v.vertices_x()[i] << "," << v.vertices_y()[i] << ")";
    return os.str();
}

// Per-node dump in the model-file syntax, so a dumped tree parses back.
template <class R>
std::string dump_model(const Model<R>& m) {
    std::ostringstream os;
    os << "bidask-model v1\nmodel tree\n";
    for (int n = 0; n < m.num_nodes(); ++n) {
        os << "node " << n;
        if (m.parent(n) < 0)
            os << " root";
        else
            os << " parent " << m.parent(n);
        os << " bid " << m.bid(n) << " ask " << m.ask(n);
        if (m.payoff(n))
            os << " payoff " << m.payoff(n)->cash << " " << m.payoff(n)->shares;
        else
            os << " none";
        os << "\n";
    }
    return os.str();
}

}  // namespace bidask
