#include <iostream>

#include "cennq/cli.hpp"

int main(int argc, char** argv) { return cennq::run_cli(argc, argv, std::cout, std::cerr); }
