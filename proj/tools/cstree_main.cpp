#include <iostream>
#include <string>
#include <vector>

#include "cstree/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return cstree::cli_dispatch(args, std::cout, std::cerr);
}
