#include <iostream>

#include "calolab/cli.hpp"

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return calolab::run_cli(args, std::cout, std::cerr);
}
