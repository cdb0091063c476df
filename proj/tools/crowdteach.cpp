#include <iostream>

#include "crowdteach/cli.hpp"

int main(int argc, char** argv) { return crowdteach::dispatch(argc, argv, std::cout, std::cerr); }
