#include <iostream>

#include "pbetc/cli.hpp"

int main(int argc, char** argv) { return pbetc::run_cli(argc, argv, std::cout, std::cerr); }
