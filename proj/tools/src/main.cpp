#include <iostream>

#include "gpebo_cli/commands.hpp"

int main(int argc, char** argv) { return gpebo::cli::run_cli(argc, argv, std::cout, std::cerr); }
