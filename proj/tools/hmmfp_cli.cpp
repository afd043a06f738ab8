#include <iostream>

#include "hmmfp/cli.hpp"

int main(int argc, char** argv) { return hmmfp::run_cli(argc, argv, std::cout, std::cerr); }
