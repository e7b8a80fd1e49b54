#include "twistshock/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return twistshock::cli::run(argc, argv, std::cout, std::cerr); }
