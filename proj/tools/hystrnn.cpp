#include <iostream>

#include "hyst/cli.hpp"

int main(int argc, char** argv) { return hyst::cli::run(argc, argv, std::cout, std::cerr); }
