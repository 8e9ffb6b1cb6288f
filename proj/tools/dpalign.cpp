#include <iostream>

#include "dpalign/cli.hpp"

int main(int argc, char** argv) { return dpalign::run_cli(argc, argv, std::cout, std::cerr); }
