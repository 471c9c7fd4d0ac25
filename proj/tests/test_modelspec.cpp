#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "bidask/buyer.hpp"
#include "bidask/debug_io.hpp"
#include "bidask/modelspec.hpp"
#include "bidask/report.hpp"
#include "bidask/seller.hpp"

using namespace bidask;
using Q = Rational;

namespace {

const char* kTreeSpec = R"(bidask-model v1
# the two-step example
model tree
node 0 root bid 10 ask 10 payoff 0 0
node 1 parent 0 bid 8 ask 16 payoff 3 0
node 2 parent 0 bid 6 ask 6 payoff 0 0
node 3 parent 1 bid 16 ask 16 payoff 9 0
node 4 parent 1 bid 10 ask 10 payoff 0 0
node 5 parent 2 bid 10 ask 10 payoff 0 0
node 6 parent 2 bid 4 ask 4 payoff 0 0
)";

const char* kLatticeSpec = R"(bidask-model v1
model binomial
S0 100
sigma 0.2
rate 0.1
maturity 0.25
steps 20
cost 0.005
no_cost_at_time0 on
never_exercise_step on
payoff put 100
)";

}  // namespace

TEST_CASE("tree model files parse and price in both modes") {
    std::istringstream in(kTreeSpec);
    auto spec = parse_model_spec(in);
    REQUIRE(spec.family == ModelSpec::Family::Tree);
    REQUIRE(spec.nodes.size() == 7);

    auto mq = build_tree_model<Q>(spec);
    CHECK(price_seller_primal(mq).price == Q(9, 2));
    CHECK(price_buyer(mq).price == Q(6, 5));

    auto md = build_tree_model<double>(spec);
    CHECK(price_seller_primal(md).price == doctest::Approx(4.5));
    CHECK(price_buyer(md).price == doctest::Approx(1.2));
}

TEST_CASE("lattice model files parse") {
    std::istringstream in(kLatticeSpec);
    auto spec = parse_model_spec(in);
    REQUIRE(spec.family == ModelSpec::Family::Binomial);
    CHECK(spec.lattice.steps == 20);
    CHECK(spec.lattice.cost == doctest::Approx(0.005));
    CHECK(spec.instrument == ModelSpec::Instrument::Put);
    auto lat = build_lattice_model(spec);
    CHECK(seller_price_view<double>(lat) == doctest::Approx(3.8674).epsilon(5e-5));
}

TEST_CASE("parse errors carry line numbers") {
    std::istringstream bad1("bogus v1\nmodel tree\n");
    CHECK_THROWS_AS(parse_model_spec(bad1), ParseError);
    try {
        std::istringstream bad2("bidask-model v1\nmodel binomial\nwidgets 3\npayoff put 100\n");
        parse_model_spec(bad2);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line == 3);
    }
    std::istringstream bad3("bidask-model v1\nmodel binomial\n");
    CHECK_THROWS_AS(parse_model_spec(bad3), ParseError);  // no payoff line
    std::istringstream bad4("bidask-model v1\nmodel tree\n");
    CHECK_THROWS_AS(parse_model_spec(bad4), ParseError);  // no nodes
    std::istringstream bad5(
        "bidask-model v1\nmodel binomial\npayoff calls 95+1\n");
    CHECK_THROWS_AS(parse_model_spec(bad5), ParseError);  // malformed leg
}

TEST_CASE("fractions and decimals parse exactly in rational mode") {
    CHECK(parse_number<Q>("9/2") == Q(9, 2));
    CHECK(parse_number<Q>("-0.125") == Q(-1, 8));
    CHECK(parse_number<Q>("3") == Q(3));
    CHECK(parse_number<double>("0.25") == 0.25);
    CHECK_THROWS_AS(parse_number<Q>("1.2.3"), ParseError);
    CHECK_THROWS_AS(parse_number<Q>("x"), ParseError);
    CHECK_THROWS_AS(parse_number<Q>("1/0"), ParseError);
}

TEST_CASE("csv formatting is fixed four decimals with a stable header") {
    std::vector<TableCell> cells{{20, 0.0, 7.16881, 7.16879}, {40, 0.0025, 1.0, -1e-12}};
    CHECK(format_csv(cells) ==
          "N,k,ask,bid\n"
          "20,0.0000,7.1688,7.1688\n"
          "40,0.0025,1.0000,0.0000\n");
    CHECK(format_csv({}) == "N,k,ask,bid\n");
}

TEST_CASE("example report is byte-stable") {
    auto text = example4_report();
    CHECK(text ==
          "two-step example, exact arithmetic\n"
          "ask = 9/2 (dual 9/2)\n"
          "bid = 6/5\n"
          "seller hedge: start (9/2,0); t0 -> (-3,3/4); u -> (-3,3/4); d -> (3/2,0)\n"
          "seller chi: u=3/4 uu=1/4 ud=1/4 du=1 dd=1\n"
          "seller P-hat: t0=1 u=1 d=0 uu=1 ud=0 du=0 dd=0\n"
          "seller S-hat: t0=10 u=8 d=6 uu=16 ud=10 du=10 dd=4\n"
          "seller expectation = 9/2\n"
          "buyer hedge: start (-6/5,0); t0 -> (9/5,-3/10); u -> (9/5,-3/10); d -> "
          "(9/5,-3/10)\n"
          "buyer stops at: u d\n"
          "buyer P-check: t0=1 u=2/5 d=3/5 uu=2/5 ud=0 du=3/5 dd=0\n"
          "buyer S-check: t0=10 u=16 d=6 uu=16 ud=10 du=10 dd=4\n"
          "buyer expectation = 6/5\n"
          "best pure stopping value = 18/5 < ask = 9/2\n");
}

TEST_CASE("model dump round-trips through the parser") {
    auto m = example4_model();
    std::istringstream in(dump_model(m));
    auto spec = parse_model_spec(in);
    auto back = build_tree_model<Q>(spec);
    REQUIRE(back.num_nodes() == m.num_nodes());
    for (int n = 0; n < m.num_nodes(); ++n) {
        CHECK(back.bid(n) == m.bid(n));
        CHECK(back.ask(n) == m.ask(n));
        CHECK(back.parent(n) == m.parent(n));
        CHECK(back.exercisable(n) == m.exercisable(n));
    }
    CHECK(price_seller_primal(back).price == Q(9, 2));
}

TEST_CASE("debug text forms") {
    auto h = transaction_kernel<Q>(Q(8), Q(16));
    CHECK(to_string(h) == "pl slopes -16 (0,0) -8");
    CHECK(to_string(PLFunction<Q>::bottom()) == "bottom");
    auto v = ConcavePL<Q>::interval(Q(8), Q(16), Q(3), Q(3));
    CHECK(to_string(v) == "concave (8,3) (16,3)");
}

TEST_CASE("cli driver round trip") {
    // write a spec file, run the driver, check the output text
    std::string path = "bidask_test_spec.txt";
    {
        std::ofstream f(path);
        f << kTreeSpec;
    }
    RunSpec rs;
    rs.spec_path = path;
    rs.rational_mode = true;
    rs.verify = true;
    rs.want_pure_gap = true;
    std::ostringstream out, err;
    int rc = run_cli(rs, out, err);
    CHECK(rc == 0);
    CHECK(out.str().find("ask = 4.5") != std::string::npos);
    CHECK(out.str().find("bid = 1.2") != std::string::npos);
    CHECK(out.str().find("pure stopping value = 3.6") != std::string::npos);
    std::remove(path.c_str());

    RunSpec missing;
    std::ostringstream o2, e2;
    CHECK(run_cli(missing, o2, e2) == 1);

    RunSpec preset;
    preset.preset = "example4";
    std::ostringstream o3, e3;
    CHECK(run_cli(preset, o3, e3) == 0);
    CHECK(o3.str() == example4_report());
}
