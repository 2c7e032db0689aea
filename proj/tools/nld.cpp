#include "nld/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return nld::run_cli(argc, argv, std::cout, std::cerr); }
