#include <iostream>
#include <string>
#include <vector>

#include "xaieval/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return xaieval::run_cli(args, std::cout, std::cerr);
}
