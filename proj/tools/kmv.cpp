#include <iostream>

#include "kmv/cli.hpp"

int main(int argc, char** argv) { return kmv::run_cli(argc, argv, std::cin, std::cout, std::cerr); }
