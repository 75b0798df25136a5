#include <iostream>

#include "fimgnn/cli.hpp"

int main(int argc, char** argv) { return fimgnn::run_cli(argc, argv, std::cout, std::cerr); }
