#include <iostream>

#include "hbeliefs/cli.hpp"

int main(int argc, char** argv) { return hbeliefs::cli::run_cli(argc, argv, std::cout, std::cerr); }
