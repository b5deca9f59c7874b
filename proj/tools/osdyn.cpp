#include <iostream>

#include "osdyn/cli/app.hpp"

int main(int argc, char** argv) { return osdyn::cli::run(argc, argv, std::cout, std::cerr); }
