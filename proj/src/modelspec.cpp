#include "bidask/modelspec.hpp"

#include <fstream>
#include <sstream>

namespace bidask {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> toks;
    std::istringstream is(line);
    std::string t;
    while (is >> t) {
        if (t[0] == '#') break;
        toks.push_back(t);
    }
    return toks;
}

bool parse_flag(const std::string& s, int line) {
    if (s == "on" || s == "true" || s == "1") return true;
    if (s == "off" || s == "false" || s == "0") return false;
    throw ParseError(line, "expected on/off, got '" + s + "'");
}

double num(const std::string& s, int line) { return parse_number<double>(s, line); }

}  // namespace

ModelSpec parse_model_spec(std::istream& in) {
    ModelSpec spec;
    std::string line;
    int lineno = 0;
    bool header_seen = false, family_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        auto toks = tokenize(line);
        if (toks.empty()) continue;
        if (!header_seen) {
            if (toks.size() != 2 || toks[0] != "bidask-model" || toks[1] != "v1")
                throw ParseError(lineno, "expected header 'bidask-model v1'");
            header_seen = true;
            continue;
        }
        const std::string& key = toks[0];
        auto need = [&](size_t n) {
            if (toks.size() != n)
                throw ParseError(lineno, "wrong number of fields for '" + key + "'");
        };
        if (key == "model") {
            need(2);
            if (toks[1] == "binomial")
                spec.family = ModelSpec::Family::Binomial;
            else if (toks[1] == "trinomial")
                spec.family = ModelSpec::Family::Trinomial;
            else if (toks[1] == "tree")
                spec.family = ModelSpec::Family::Tree;
            else
                throw ParseError(lineno, "unknown model family '" + toks[1] + "'");
            family_seen = true;
        } else if (key == "S0") {
            need(2);
            spec.lattice.S0 = num(toks[1], lineno);
        } else if (key == "sigma") {
            need(2);
            spec.lattice.sigma = num(toks[1], lineno);
        } else if (key == "rate") {
            need(2);
            spec.lattice.rate = num(toks[1], lineno);
        } else if (key == "maturity") {
            need(2);
            spec.lattice.maturity = num(toks[1], lineno);
        } else if (key == "steps") {
            need(2);
            spec.lattice.steps = static_cast<int>(num(toks[1], lineno));
        } else if (key == "cost") {
            need(2);
            spec.lattice.cost = num(toks[1], lineno);
        } else if (key == "no_cost_at_time0") {
            need(2);
            spec.lattice.no_cost_at_time0 = parse_flag(toks[1], lineno);
        } else if (key == "never_exercise_step") {
            need(2);
            spec.lattice.never_exercise_step = parse_flag(toks[1], lineno);
        } else if (key == "payoff") {
            if (toks.size() < 2) throw ParseError(lineno, "payoff needs a kind");
            if (toks[1] == "put") {
                need(3);
                spec.instrument = ModelSpec::Instrument::Put;
                spec.strike = num(toks[2], lineno);
            } else if (toks[1] == "calls") {
                if (toks.size() < 3) throw ParseError(lineno, "payoff calls needs legs");
                spec.instrument = ModelSpec::Instrument::CallBasket;
                for (size_t i = 2; i < toks.size(); ++i) {
                    auto colon = toks[i].find(':');
                    if (colon == std::string::npos)
                        throw ParseError(lineno, "call leg must be strike:sign");
                    double strike = num(toks[i].substr(0, colon), lineno);
                    int sign = static_cast<int>(num(toks[i].substr(colon + 1), lineno));
                    if (strike <= 0) throw ParseError(lineno, "strike must be positive");
                    spec.legs.emplace_back(strike, sign);
                }
            } else {
                throw ParseError(lineno, "unknown payoff kind '" + toks[1] + "'");
            }
        } else if (key == "node") {
            // node <id> root|parent <pid> bid <b> ask <a> payoff <xi> <zeta> | none
            if (toks.size() < 7) throw ParseError(lineno, "node line too short");
            ModelSpec::NodeSpec ns;
            ns.id = static_cast<int>(num(toks[1], lineno));
            size_t i = 2;
            if (toks[i] == "root") {
                ns.parent = -1;
                ++i;
            } else if (toks[i] == "parent") {
                ns.parent = static_cast<int>(num(toks[i + 1], lineno));
                i += 2;
            } else {
                throw ParseError(lineno, "expected 'root' or 'parent <id>'");
            }
            if (i + 3 >= toks.size() || toks[i] != "bid" || toks[i + 2] != "ask")
                throw ParseError(lineno, "expected 'bid <b> ask <a>'");
            ns.bid = toks[i + 1];
            ns.ask = toks[i + 3];
            i += 4;
            if (i >= toks.size()) throw ParseError(lineno, "missing payoff section");
            if (toks[i] == "none") {
                ns.exercisable = false;
            } else if (toks[i] == "payoff" && i + 2 < toks.size()) {
                ns.exercisable = true;
                ns.cash = toks[i + 1];
                ns.shares = toks[i + 2];
            } else {
                throw ParseError(lineno, "expected 'payoff <cash> <shares>' or 'none'");
            }
            spec.nodes.push_back(std::move(ns));
        } else {
            throw ParseError(lineno, "unknown key '" + key + "'");
        }
    }
    if (!header_seen) throw ParseError(lineno, "missing 'bidask-model v1' header");
    if (!family_seen) throw ParseError(lineno, "missing 'model' line");
    if (spec.family == ModelSpec::Family::Tree && spec.nodes.empty())
        throw ParseError(lineno, "tree model without node lines");
    if (spec.family != ModelSpec::Family::Tree &&
        spec.instrument == ModelSpec::Instrument::None)
        throw ParseError(lineno, "lattice model without a payoff line");
    return spec;
}

ModelSpec parse_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot open model file: " + path);
    return parse_model_spec(in);
}

Lattice<double> build_lattice_model(const ModelSpec& spec) {
    Lattice<double> lat;
    switch (spec.family) {
        case ModelSpec::Family::Binomial:
            lat = build_binomial(spec.lattice);
            break;
        case ModelSpec::Family::Trinomial:
            lat = build_trinomial(spec.lattice);
            break;
        default:
            throw ModelError("build_lattice_model: spec describes a tree");
    }
    if (spec.instrument == ModelSpec::Instrument::Put)
        set_put_payoff(lat, spec.strike);
    else
        set_cash_basket_payoff(lat, spec.legs);
    return lat;
}

}  // namespace bidask
