#include <iostream>

#include "tabling/cli.hpp"

int main(int argc, char** argv) { return tabling::cli::run_command(argc, argv, std::cout, std::cerr); }
