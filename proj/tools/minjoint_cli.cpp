#include <iostream>

#include "minjoint/cli.hpp"

int main(int argc, char** argv) { return minjoint::run_cli(argc, argv, std::cout, std::cerr); }
