// SPDX-License-Identifier: MIT
//
// Command-line front end.  Exit codes: 0 = success, 1 = a verified
// mathematical property failed (identity violated, spectrum off, path not
// fundamental), 2 = usage error (bad flags, unparsable input, violated
// precondition, unwritable output).

#pragma once

#include <cstdint>
#include <string>

namespace nablan {

// Parsed command-line state, one instance per invocation.
struct RunConfig {
  std::string command;
  long n = 0;
  std::string t_text = "1/2";
  std::string backend = "float";  // "float" | "exact"
  std::string format = "json";    // "json" | "csv"
  std::string out_path;           // empty = stdout
  std::string family = "canonical";
  std::string f_text;             // comma-separated grid function
  std::string op;                 // dump-operator tag
  std::string norms_out;          // dump-basis second CSV
  std::string n_list = "50,100,200,400";
  double lambda = 2.0;
  double tol = 1e-9;
  double slack_tol = 1e-10;
  int grid_points = 101;
  int pairs = 100;
  int trials = 64;
  std::uint64_t seed = 1;
};

int run_cli(int argc, const char* const* argv);

}  // namespace nablan
