#include <iostream>

#include "varieties/pipeline.h"

int main(int argc, char** argv) {
  return varieties::run_cli(argc, argv, std::cout, std::cerr);
}
