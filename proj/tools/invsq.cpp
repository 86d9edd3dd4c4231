#include "invsq/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return invsq::run_cli(argc, argv, std::cout, std::cerr); }
