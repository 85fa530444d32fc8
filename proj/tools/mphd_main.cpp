#include <iostream>
#include <string>
#include <vector>

#include "mphd/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return mphd::run_cli(args, std::cout, std::cerr);
}
