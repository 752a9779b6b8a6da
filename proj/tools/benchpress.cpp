#include <iostream>

#include "benchpress/cli.hpp"

int main(int argc, char** argv) { return benchpress::run_cli(argc, argv, std::cout, std::cerr); }
