#include "dlsfem/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return dlsfem::run_cli(argc, argv, std::cout, std::cerr); }
