#include <iostream>
#include <string>
#include <vector>

#include "latocc/cli/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return latocc::run_cli(args, std::cout, std::cerr);
}
