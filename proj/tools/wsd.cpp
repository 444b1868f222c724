#include <iostream>

#include "wsd/cli.hpp"

int main(int argc, char** argv) { return wsd::run_cli(argc, argv, std::cout, std::cerr); }
