// SPDX-License-Identifier: MIT
#include "kal/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return kal::run_cli(argc, argv, std::cout, std::cerr); }
