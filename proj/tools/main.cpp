#include <iostream>

#include "modgraph/cli.hpp"

int main(int argc, char** argv) { return modgraph::run_cli(argc, argv, std::cout, std::cerr); }
