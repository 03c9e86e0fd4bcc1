#include <iostream>

#include "epec/cli.hpp"

int main(int argc, char** argv) { return epec::run(argc, argv, std::cout, std::cerr); }
