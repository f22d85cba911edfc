#include <iostream>

#include "rockcap/cli/cli.hpp"

int main(int argc, char** argv) { return rockcap::cli::run_cli(argc, argv, std::cout, std::cerr); }
