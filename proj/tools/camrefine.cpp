#include <iostream>
#include <string>
#include <vector>

#include "camref/commands.hpp"

int main(int argc, char** argv) {
    return camref::cli::main(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
