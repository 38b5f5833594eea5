#include "commands.hpp"

#include <iostream>

int main(int argc, char** argv) {
  return relfit::run(argc, argv, std::cout, std::cerr);
}
