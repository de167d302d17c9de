#include <iostream>

#include "fwf/cli.hpp"

int main(int argc, char** argv) {
    return fwf::cli::run(argc, argv, std::cout, std::cerr);
}
