#include <iostream>

#include "occ/cli.hpp"

int main(int argc, char** argv) { return occ::run_cli(argc, argv, std::cout, std::cerr); }
