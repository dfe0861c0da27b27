#include <iostream>

#include "sn/cli.hpp"

int main(int argc, char** argv) {
    return sn::run_cli(argc, argv, std::cout, std::cerr);
}
