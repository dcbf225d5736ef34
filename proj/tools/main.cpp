#include <iostream>

#include "optrec/cli.hpp"

int main(int argc, char** argv) { return optrec::run_cli(argc, argv, std::cout, std::cerr); }
