#include <iostream>

#include "ecmtk/cli.hpp"

int main(int argc, char** argv) { return ecmtk::cli::run(argc, argv, std::cout, std::cerr); }
