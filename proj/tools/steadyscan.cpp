#include <iostream>

#include "steadyscan/cli.hpp"

int main(int argc, char** argv) { return steadyscan::run_cli(argc, argv, std::cout, std::cerr); }
