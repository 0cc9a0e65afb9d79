#include <iostream>

#include "dcsmooth/cli.hpp"

int main(int argc, char** argv) { return dcsmooth::run_cli(argc, argv, std::cout, std::cerr); }
