#include <iostream>
#include <string>
#include <vector>

#include "fuzzytomo/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return fuzzytomo::cli::run_command(args, std::cout, std::cerr);
}
