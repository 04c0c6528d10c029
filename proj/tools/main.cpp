#include <iostream>

#include "sphreg_cli/cli.hpp"

int main(int argc, char** argv) { return sphreg::cli::run(argc, argv, std::cout, std::cerr); }
