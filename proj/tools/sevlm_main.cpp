#include <iostream>

#include "sevlm/commands.hpp"

int main(int argc, char** argv) { return sevlm::run_cli(argc, argv, std::cout, std::cerr); }
