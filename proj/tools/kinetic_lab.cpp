#include <iostream>

#include "kinetic/cli.hpp"

int main(int argc, char** argv) { return kinetic::run_cli(argc, argv, std::cout, std::cerr); }
