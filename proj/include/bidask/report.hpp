#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bidask/modelspec.hpp"

namespace bidask {

struct RunSpec {
    std::string spec_path;  // model file; unused when a preset is set
    std::string preset;     // table1 | table2 | table3 | example4 | empty
    std::string csv_path;   // empty = no CSV
    bool verify = false;
    bool rational_mode = false;  // presets override per their definition
    bool want_hedge = false;
    bool want_certificate = false;
    bool want_pure_gap = false;
};

struct TableCell {
    int N;
    double k;
    double ask;
    double bid;
};

// Reproduces the numerical study grids: N in {20,40,100,250,500,1000},
// k in {0, 0.25, 0.5, 1, 2}%; table1 = binomial put, table2 = binomial bull
// spread, table3 = trinomial bull spread.
std::vector<TableCell> run_table_preset(const std::string& name, bool verify,
                                        std::ostream* log = nullptr);

std::string format_csv(const std::vector<TableCell>& cells);
void write_csv(const std::string& path, const std::vector<TableCell>& cells);

// The two-step worked example, exact arithmetic; deterministic report.
std::string example4_report();
Model<Rational> example4_model();

// Returns the process exit code: 0 ok, 1 error, 2 verification mismatch.
// Errors are reported on `err`, results on `out`.
int run_cli(const RunSpec& spec, std::ostream& out, std::ostream& err);

}  // namespace bidask
