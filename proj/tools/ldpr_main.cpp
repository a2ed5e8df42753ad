#include <iostream>

#include "ldpr/cli.hpp"

int main(int argc, char** argv) { return ldpr::run_cli(argc, argv, std::cout, std::cerr); }
