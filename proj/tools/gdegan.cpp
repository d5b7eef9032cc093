#include "gdegan/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return gdegan::run_cli(argc, argv, std::cout, std::cerr); }
