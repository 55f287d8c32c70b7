#include <iostream>

#include "lieopt/cli.hpp"

int main(int argc, char** argv) { return lieopt::cli::run(argc, argv, std::cout, std::cerr); }
