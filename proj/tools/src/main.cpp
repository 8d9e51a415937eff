#include <iostream>

#include "halp_cli/cli.hpp"

int main(int argc, char** argv) {
    return halp::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
