#include <iostream>

#include "rmdyn/driver.hpp"

int main(int argc, char** argv) { return rmdyn::cli_main(argc, argv, std::cout, std::cerr); }
