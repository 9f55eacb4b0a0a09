#include <iostream>

#include "fusion/cli.hpp"

int main(int argc, char** argv) { return fusion::cli::run(argc, argv, std::cout, std::cerr); }
