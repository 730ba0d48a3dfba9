#include <iostream>

#include "finality/cli.hpp"

int main(int argc, char** argv) {
    return finality::cli::main(argc, argv, std::cout, std::cerr);
}
