#include <iostream>

#include "lsm/cli.hpp"

int main(int argc, char** argv) {
    return lsm::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
