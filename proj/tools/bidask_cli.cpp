#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bidask/report.hpp"

int main(int argc, char** argv) {
    CLI::App app{"American option pricing under proportional transaction costs"};
    app.require_subcommand(1);

    bidask::RunSpec rs;
    std::string mode = "float";

    CLI::App* price = app.add_subcommand("price", "price an instrument on a market model");
    price->add_option("--spec", rs.spec_path, "model description file");
    price->add_option("--csv", rs.csv_path, "write results as CSV");
    price->add_flag("--verify", rs.verify, "cross-check with the independent oracles");
    price->add_option("--mode", mode, "arithmetic mode: rational|float")
        ->check(CLI::IsMember({"rational", "float"}));
    price->add_option("--preset", rs.preset, "table1|table2|table3|example4")
        ->check(CLI::IsMember({"table1", "table2", "table3", "example4"}));
    price->add_flag("--hedge", rs.want_hedge, "print hedging strategies (tree models)");
    price->add_flag("--certificate", rs.want_certificate,
                    "print the stopping time and approximate martingale (tree models)");
    price->add_flag("--pure-gap", rs.want_pure_gap,
                    "compare against the best pure stopping time (small trees)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }
    rs.rational_mode = mode == "rational";
    return bidask::run_cli(rs, std::cout, std::cerr);
}
