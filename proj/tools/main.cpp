#include <iostream>

#include "docplan/cli.hpp"

int main(int argc, char** argv) { return docplan::cli::run(argc, argv, std::cout, std::cerr); }
