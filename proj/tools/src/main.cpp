#include <iostream>

#include "survood_cli/commands.hpp"

int main(int argc, char** argv) {
    return survood::cli::run_cli(argc, argv, std::cout, std::cerr);
}
