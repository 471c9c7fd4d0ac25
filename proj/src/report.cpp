#include "bidask/report.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <thread>
#include <fstream>
#include <ostream>
#include <sstream>

#include "bidask/buyer.hpp"
#include "bidask/oracle.hpp"
#include "bidask/seller.hpp"

namespace bidask {

namespace {

std::string fixed4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    std::string s(buf);
    if (s == "-0.0000") s = "0.0000";
    return s;
}

std::string frac(const Rational& q) {
    std::ostringstream os;
    os << q;
    return os.str();
}

const std::vector<int> kTableN{20, 40, 100, 250, 500, 1000};
const std::vector<double> kTableK{0.0, 0.0025, 0.005, 0.01, 0.02};

Lattice<double> table_lattice(const std::string& name, int N, double k) {
    LatticeParams p;
    p.steps = N;
    p.cost = k;
    if (name == "table1") {
        auto lat = build_binomial(p);
        set_put_payoff(lat, 100.0);
        return lat;
    }
    if (name == "table2") {
        auto lat = build_binomial(p);
        set_cash_basket_payoff(lat, {{95.0, +1}, {105.0, -1}});
        return lat;
    }
    if (name == "table3") {
        auto lat = build_trinomial(p);
        set_cash_basket_payoff(lat, {{95.0, +1}, {105.0, -1}});
        return lat;
    }
    throw ModelError("unknown table preset: " + name);
}

}  // namespace

std::vector<TableCell> run_table_preset(const std::string& name, bool verify,
                                        std::ostream* log) {
    std::vector<TableCell> cells;
    for (double k : kTableK)
        for (int N : kTableN) cells.push_back({N, k, 0.0, 0.0});
    // cells are independent pricing runs; fan them out over the hardware
    std::atomic<size_t> cursor{0};
    std::mutex fail_mutex;
    std::string failure;
    auto worker = [&] {
        for (;;) {
            size_t i = cursor.fetch_add(1);
            if (i >= cells.size()) return;
            try {
                auto lat = table_lattice(name, cells[i].N, cells[i].k);
                cells[i].ask = seller_price_view<double>(lat);
                cells[i].bid = buyer_price_view<double>(lat);
                if (verify) {
                    double dual = seller_price_dual_view<double>(lat);
                    double rel = std::fabs(dual - cells[i].ask) /
                                 std::max(1.0, std::fabs(cells[i].ask));
                    if (rel > 1e-9)
                        throw ModelError("verification mismatch: primal/dual ask differ at N=" +
                                         std::to_string(cells[i].N));
                    if (cells[i].bid > cells[i].ask + 1e-9)
                        throw ModelError("verification mismatch: bid above ask at N=" +
                                         std::to_string(cells[i].N));
                }
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(fail_mutex);
                if (failure.empty()) failure = e.what();
            }
        }
    };
    size_t nthreads = std::min<size_t>(std::max(1u, std::thread::hardware_concurrency()),
                                       cells.size());
    std::vector<std::thread> pool;
    for (size_t t = 1; t < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (!failure.empty()) throw ModelError(failure);
    if (log)
        for (const auto& c : cells)
            *log << name << " N=" << c.N << " k=" << fixed4(c.k) << " ask=" << fixed4(c.ask)
                 << " bid=" << fixed4(c.bid) << "\n";
    return cells;
}

std::string format_csv(const std::vector<TableCell>& cells) {
    std::string out = "N,k,ask,bid\n";
    for (const auto& c : cells) {
        out += std::to_string(c.N);
        out += ',';
        out += fixed4(c.k);
        out += ',';
        out += fixed4(c.ask);
        out += ',';
        out += fixed4(c.bid);
        out += '\n';
    }
    return out;
}

void write_csv(const std::string& path, const std::vector<TableCell>& cells) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ModelError("cannot write CSV file: " + path);
    f << format_csv(cells);
}

Model<Rational> example4_model() {
    using Q = Rational;
    Model<Q> m;
    int r = m.add_root(Q(10), Q(10), CashShares<Q>{Q(0), Q(0)});
    int u = m.add_node(r, Q(8), Q(16), CashShares<Q>{Q(3), Q(0)});
    int d = m.add_node(r, Q(6), Q(6), CashShares<Q>{Q(0), Q(0)});
    m.add_node(u, Q(16), Q(16), CashShares<Q>{Q(9), Q(0)});
    m.add_node(u, Q(10), Q(10), CashShares<Q>{Q(0), Q(0)});
    m.add_node(d, Q(10), Q(10), CashShares<Q>{Q(0), Q(0)});
    m.add_node(d, Q(4), Q(4), CashShares<Q>{Q(0), Q(0)});
    m.validate();
    return m;
}

std::string example4_report() {
    using Q = Rational;
    auto m = example4_model();
    const char* names[] = {"t0", "u", "d", "uu", "ud", "du", "dd"};
    auto primal = price_seller_primal(m);
    auto dual = price_seller_dual(m);
    auto buyer = price_buyer(m);
    std::ostringstream os;
    os << "two-step example, exact arithmetic\n";
    os << "ask = " << frac(primal.price) << " (dual " << frac(dual.price) << ")\n";
    os << "bid = " << frac(buyer.price) << "\n";
    auto hedge = hedge_seller(m, primal, CashShares<Q>{primal.price, Q(0)});
    os << "seller hedge: start (" << frac(hedge.initial.cash) << ","
       << frac(hedge.initial.shares) << ")";
    for (int n = 0; n < m.num_nodes(); ++n)
        if (!m.is_leaf(n))
            os << "; " << names[n] << " -> (" << frac(hedge.next[n].cash) << ","
               << frac(hedge.next[n].shares) << ")";
    os << "\n";
    auto cert = construct_seller_certificate(m, dual);
    os << "seller chi:";
    for (int n = 0; n < m.num_nodes(); ++n)
        if (cert.chi.mass[n] != Q(0))
            os << " " << names[n] << "=" << frac(cert.chi.mass[n]);
    os << "\nseller P-hat:";
    for (int n = 0; n < m.num_nodes(); ++n)
        os << " " << names[n] << "=" << frac(cert.ps.prob[n]);
    os << "\nseller S-hat:";
    for (int n = 0; n < m.num_nodes(); ++n)
        os << " " << names[n] << "=" << frac(cert.ps.price[n]);
    os << "\nseller expectation = " << frac(cert.expectation) << "\n";
    auto bh = hedge_buyer(m, buyer, CashShares<Q>{Q(-buyer.price), Q(0)});
    os << "buyer hedge: start (" << frac(bh.first.initial.cash) << ","
       << frac(bh.first.initial.shares) << ")";
    for (int n = 0; n < m.num_nodes(); ++n)
        if (!m.is_leaf(n))
            os << "; " << names[n] << " -> (" << frac(bh.first.next[n].cash) << ","
               << frac(bh.first.next[n].shares) << ")";
    os << "\nbuyer stops at:";
    for (int n = 0; n < m.num_nodes(); ++n)
        if (bh.second.stop[n]) os << " " << names[n];
    auto bc = construct_buyer_certificate(m, bh.second);
    os << "\nbuyer P-check:";
    for (int n = 0; n < m.num_nodes(); ++n)
        os << " " << names[n] << "=" << frac(bc.ps.prob[n]);
    os << "\nbuyer S-check:";
    for (int n = 0; n < m.num_nodes(); ++n)
        os << " " << names[n] << "=" << frac(bc.ps.price[n]);
    os << "\nbuyer expectation = " << frac(bc.expectation) << "\n";
    auto gap = check_pure_stopping_gap(m);
    os << "best pure stopping value = " << frac(gap.first) << " < ask = " << frac(gap.second)
       << "\n";
    return os.str();
}

namespace {

// Tree-model run in either arithmetic; returns false on verification failure.
template <class R>
bool run_tree(const ModelSpec& spec, const RunSpec& rs, std::ostream& out) {
    Model<R> m = build_tree_model<R>(spec);
    bool ok = true;
    auto primal = price_seller_primal(m);
    auto dual = price_seller_dual(m);
    auto buyer = price_buyer(m);
    out << "ask = " << Arith<R>::to_double(primal.price) << "\n";
    out << "bid = " << Arith<R>::to_double(buyer.price) << "\n";
    if (!Arith<R>::close(primal.price, dual.price)) ok = false;
    if (rs.want_hedge) {
        auto hs = hedge_seller(m, primal, CashShares<R>{primal.price, R(0)});
        out << "seller hedge (cash,shares) per node:";
        for (int n = 0; n < m.num_nodes(); ++n)
            if (!m.is_leaf(n))
                out << " " << n << ":(" << Arith<R>::to_double(hs.next[n].cash) << ","
                    << Arith<R>::to_double(hs.next[n].shares) << ")";
        out << "\n";
        auto hb = hedge_buyer(m, buyer, CashShares<R>{R(-buyer.price), R(0)});
        out << "buyer stops at:";
        for (int n = 0; n < m.num_nodes(); ++n)
            if (hb.second.stop[n]) out << " " << n;
        out << "\n";
        if (rs.verify) {
            if (!is_self_financing(m, hs).ok) ok = false;
            if (!is_self_financing(m, hb.first).ok) ok = false;
        }
    }
    if (rs.want_certificate || rs.verify) {
        auto cert = construct_seller_certificate(m, dual);
        if (rs.want_certificate) {
            out << "seller chi:";
            for (int n = 0; n < m.num_nodes(); ++n)
                if (cert.chi.mass[n] != R(0))
                    out << " " << n << "=" << Arith<R>::to_double(cert.chi.mass[n]);
            out << "\n";
        }
        if (rs.verify) {
            if (!verify_approx_martingale(m, cert.ps, cert.chi).ok) ok = false;
            if (!Arith<R>::close(cert.expectation, primal.price)) ok = false;
            if (!certificate_identities_hold(m, cert)) ok = false;
        }
    }
    if (rs.want_pure_gap) {
        auto gap = check_pure_stopping_gap(m);
        out << "pure stopping value = " << Arith<R>::to_double(gap.first)
            << " vs ask = " << Arith<R>::to_double(gap.second) << "\n";
    }
    if (rs.verify && Arith<R>::exact && m.num_nodes() <= 200) {
        if constexpr (Arith<R>::exact) {
            auto os = oracle_seller_price(m);
            if (os.price != primal.price) ok = false;
            if (oracle_buyer_price(m) != buyer.price) ok = false;
        }
    }
    return ok;
}

}  // namespace

int run_cli(const RunSpec& rs, std::ostream& out, std::ostream& err) {
    try {
        if (!rs.preset.empty()) {
            if (rs.preset == "example4") {
                out << example4_report();
                return 0;
            }
            auto cells = run_table_preset(rs.preset, rs.verify, &out);
            if (!rs.csv_path.empty()) write_csv(rs.csv_path, cells);
            return 0;
        }
        if (rs.spec_path.empty()) {
            err << "error: no --spec file and no --preset\n";
            return 1;
        }
        ModelSpec spec = parse_model_file(rs.spec_path);
        if (spec.family == ModelSpec::Family::Tree) {
            bool ok = rs.rational_mode ? run_tree<Rational>(spec, rs, out)
                                       : run_tree<double>(spec, rs, out);
            if (!ok) {
                err << "verification mismatch\n";
                return 2;
            }
            return 0;
        }
        if (rs.rational_mode) {
            err << "error: rational mode requires an explicit tree model\n";
            return 1;
        }
        auto lat = build_lattice_model(spec);
        double ask = seller_price_view<double>(lat);
        double bid = buyer_price_view<double>(lat);
        out << "ask = " << fixed4(ask) << "\n";
        out << "bid = " << fixed4(bid) << "\n";
        if (rs.verify) {
            double dual = seller_price_dual_view<double>(lat);
            if (std::fabs(dual - ask) > 1e-9 * std::max(1.0, std::fabs(ask)) ||
                bid > ask + 1e-9) {
                err << "verification mismatch\n";
                return 2;
            }
        }
        if (!rs.csv_path.empty()) {
            write_csv(rs.csv_path,
                      {TableCell{spec.lattice.steps, spec.lattice.cost, ask, bid}});
        }
        return 0;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return 1;
    } catch (const BudgetError& e) {
        err << "budget error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace bidask
