#include <iostream>

#include "fisherbound/cli.hpp"

int main(int argc, char **argv) {
    return fisherbound::cli::run(argc, argv, std::cout, std::cerr);
}
