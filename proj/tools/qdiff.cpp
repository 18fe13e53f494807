#include <iostream>
#include <string>
#include <vector>

#include "qdiff/cli.hpp"

int main(int argc, char** argv) {
    return qdiff::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
