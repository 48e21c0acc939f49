#include <iostream>

#include "alvq/commands.hpp"

int main(int argc, char** argv) { return alvq::run_cli(argc, argv, std::cout, std::cerr); }
