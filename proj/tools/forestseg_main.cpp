#include <iostream>

#include "forestseg/cli.hpp"

int main(int argc, char** argv) {
    return forestseg::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
