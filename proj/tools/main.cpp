// SPDX-License-Identifier: MIT

#include "cli/cli.hpp"

int main(int argc, char** argv) { return nablan::run_cli(argc, argv); }
