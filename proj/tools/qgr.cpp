#include <iostream>

#include "qgr/cli.hpp"

int main(int argc, char** argv) { return qgr::cli::run(argc, argv, std::cout, std::cerr); }
