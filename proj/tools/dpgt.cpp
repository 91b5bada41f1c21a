#include <iostream>

#include "dpgt/cli.hpp"

int main(int argc, char** argv) { return dpgt::cli::run(argc, argv, std::cout, std::cerr); }
