#include <iostream>

#include "hyfermi/cli.hpp"

int main(int argc, char** argv) {
    std::ios::sync_with_stdio(false);
    return hyfermi::cli::main_entry({argv + 1, argv + argc}, std::cout, std::cerr);
}
