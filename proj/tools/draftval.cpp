#include <iostream>

#include "draftval/cli.hpp"

int main(int argc, char** argv) { return draftval::run_cli(argc, argv, std::cout, std::cerr); }
