#include <iostream>

#include "crlkit/cli.hpp"
#include "crlkit/platform.hpp"

int main(int argc, char** argv) {
  crl::tune_allocator();
  return crl::run_cli(argc, argv, std::cout, std::cerr);
}
