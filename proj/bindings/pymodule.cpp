#include <optional>
#include <utility>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bidask/buyer.hpp"
#include "bidask/oracle.hpp"
#include "bidask/report.hpp"
#include "bidask/seller.hpp"

namespace py = pybind11;
using namespace bidask;

namespace {

using DTree = Model<double>;
using Pay = std::optional<std::pair<double, double>>;

NodePayoff<double> to_payoff(const Pay& p) {
    if (!p) return std::nullopt;
    return CashShares<double>{p->first, p->second};
}

py::dict seller_report(const DTree& m) {
    auto primal = price_seller_primal(m);
    auto dual = price_seller_dual(m);
    auto cert = construct_seller_certificate(m, dual);
    auto hedge = hedge_seller(m, primal, CashShares<double>{primal.price, 0.0});
    py::dict d;
    d["ask"] = primal.price;
    d["chi"] = cert.chi.mass;
    d["prob"] = cert.ps.prob;
    d["price_process"] = cert.ps.price;
    d["expectation"] = cert.expectation;
    py::list holdings;
    for (int n = 0; n < m.num_nodes(); ++n)
        holdings.append(py::make_tuple(hedge.next[n].cash, hedge.next[n].shares));
    d["hedge"] = holdings;
    d["hedge_initial"] = py::make_tuple(hedge.initial.cash, hedge.initial.shares);
    return d;
}

py::dict buyer_report(const DTree& m) {
    auto run = price_buyer(m);
    auto [strat, tau] = hedge_buyer(m, run, CashShares<double>{-run.price, 0.0});
    auto cert = construct_buyer_certificate(m, tau);
    py::dict d;
    d["bid"] = run.price;
    py::list stops;
    for (int n = 0; n < m.num_nodes(); ++n)
        if (tau.stop[n]) stops.append(n);
    d["stop_nodes"] = stops;
    d["prob"] = cert.ps.prob;
    d["price_process"] = cert.ps.price;
    d["expectation"] = cert.expectation;
    py::list holdings;
    for (int n = 0; n < m.num_nodes(); ++n)
        holdings.append(py::make_tuple(strat.next[n].cash, strat.next[n].shares));
    d["hedge"] = holdings;
    d["hedge_initial"] = py::make_tuple(strat.initial.cash, strat.initial.shares);
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "American options under proportional transaction costs";

    py::class_<DTree>(m, "Tree")
        .def(py::init<>())
        .def(
            "add_root",
            [](DTree& t, double bid, double ask, const Pay& payoff) {
                return t.add_root(bid, ask, to_payoff(payoff));
            },
            py::arg("bid"), py::arg("ask"), py::arg("payoff") = py::none())
        .def(
            "add_node",
            [](DTree& t, int parent, double bid, double ask, const Pay& payoff) {
                return t.add_node(parent, bid, ask, to_payoff(payoff));
            },
            py::arg("parent"), py::arg("bid"), py::arg("ask"), py::arg("payoff") = py::none())
        .def("validate", &DTree::validate)
        .def("num_nodes", &DTree::num_nodes)
        .def("horizon", &DTree::horizon);

    py::class_<Lattice<double>>(m, "Lattice")
        .def("horizon", &Lattice<double>::horizon)
        .def("width", &Lattice<double>::width);

    m.def(
        "binomial_model",
        [](double S0, double sigma, double maturity, double rate, int steps, double cost,
           bool no_cost_at_time0, bool never_exercise_step) {
            LatticeParams p{S0, sigma, maturity, rate, steps, cost, no_cost_at_time0,
                            never_exercise_step};
            return build_binomial(p);
        },
        py::arg("S0") = 100.0, py::arg("sigma") = 0.2, py::arg("maturity") = 0.25,
        py::arg("rate") = 0.1, py::arg("steps") = 20, py::arg("cost") = 0.0,
        py::arg("no_cost_at_time0") = true, py::arg("never_exercise_step") = true);
    m.def(
        "trinomial_model",
        [](double S0, double sigma, double maturity, double rate, int steps, double cost,
           bool no_cost_at_time0, bool never_exercise_step) {
            LatticeParams p{S0, sigma, maturity, rate, steps, cost, no_cost_at_time0,
                            never_exercise_step};
            return build_trinomial(p);
        },
        py::arg("S0") = 100.0, py::arg("sigma") = 0.2, py::arg("maturity") = 0.25,
        py::arg("rate") = 0.1, py::arg("steps") = 20, py::arg("cost") = 0.0,
        py::arg("no_cost_at_time0") = true, py::arg("never_exercise_step") = true);

    m.def("set_put_payoff", [](Lattice<double>& lat, double K) { set_put_payoff(lat, K); });
    m.def("set_call_basket_payoff",
          [](Lattice<double>& lat, const std::vector<std::pair<double, int>>& legs) {
              set_cash_basket_payoff(lat, legs);
          });

    m.def("ask_price", [](const Lattice<double>& lat) { return seller_price_view<double>(lat); });
    m.def("bid_price", [](const Lattice<double>& lat) { return buyer_price_view<double>(lat); });
    m.def("ask_price", [](const DTree& t) { return price_seller_primal(t).price; });
    m.def("bid_price", [](const DTree& t) { return price_buyer(t).price; });
    m.def("snell_envelope", [](const Lattice<double>& lat) { return snell_envelope(lat); });

    m.def("seller_report", &seller_report,
          "price, mixed stopping time, approximate martingale and hedge for the seller");
    m.def("buyer_report", &buyer_report,
          "price, stopping time, approximate martingale and hedge for the buyer");

    m.def("pure_stopping_gap", [](const DTree& t) {
        auto [pure, ask] = check_pure_stopping_gap(t);
        return py::make_tuple(pure, ask);
    });

    m.def(
        "run_table",
        [](const std::string& name, bool verify) {
            auto cells = run_table_preset(name, verify, nullptr);
            py::list rows;
            for (const auto& c : cells) rows.append(py::make_tuple(c.N, c.k, c.ask, c.bid));
            return rows;
        },
        py::arg("name"), py::arg("verify") = false);
    m.def("example4_report", &example4_report);
}
