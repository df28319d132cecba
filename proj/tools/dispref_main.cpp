#include <iostream>

#include "dispref/cli/commands.hpp"

int main(int argc, char** argv) { return dispref::run_cli(argc, argv, std::cout, std::cerr); }
