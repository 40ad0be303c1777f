#include <iostream>

#include "homogenize/cli.hpp"

int main(int argc, char** argv) { return homog::run(argc, argv, std::cout, std::cerr); }
