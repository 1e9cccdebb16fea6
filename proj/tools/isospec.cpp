#include <iostream>

#include "isospec/cli.hpp"

int main(int argc, char** argv) { return isospec::run_cli(argc, argv, std::cout, std::cerr); }
