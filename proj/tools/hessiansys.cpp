#include <iostream>

#include "hessiansys/cli.hpp"

int main(int argc, char** argv) { return hessiansys::run_cli(argc, argv, std::cout, std::cerr); }
