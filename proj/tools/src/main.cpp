#include <iostream>

#include "relent_cli/cli.hpp"

int main(int argc, char** argv) { return relent::cli::run_cli(argc, argv, std::cout, std::cerr); }
