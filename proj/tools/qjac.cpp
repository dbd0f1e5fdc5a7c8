#include <iostream>

#include "qjac/cli.hpp"

int main(int argc, char** argv) { return qjac::run_cli(argc, argv, std::cout, std::cerr); }
