#include <iostream>
#include <string>
#include <vector>

#include "chdisc/cli_core.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return chdisc::run_cli(args, std::cout, std::cerr);
}
