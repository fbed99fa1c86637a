#include <iostream>
#include <string>
#include <vector>

#include "ems/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return ems::cli::run_cli(args, std::cout, std::cerr);
}
