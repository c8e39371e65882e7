#include <iostream>
#include <string>
#include <vector>

#include "stvc/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return stvc::cli_dispatch(args, std::cout, std::cerr);
}
