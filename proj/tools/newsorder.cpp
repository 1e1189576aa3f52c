#include <iostream>

#include "newsorder/cli.hpp"

int main(int argc, char** argv) {
  try {
    return newsorder::cli::run(argc, argv, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return newsorder::cli::kInternal;
  }
}
