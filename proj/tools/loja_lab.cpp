#include <iostream>

#include "lojalab/experiment.hpp"

int main(int argc, char** argv) { return lojalab::run_cli(argc, argv, std::cout, std::cerr); }
