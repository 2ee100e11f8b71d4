#include <iostream>

#include "oplab_cli/cli.hpp"

int main(int argc, char** argv) { return oplab::cli::cli_main(argc, argv, std::cout, std::cerr); }
