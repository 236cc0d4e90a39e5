#include <iostream>
#include <string>
#include <vector>

#include "relnn/cli.hpp"
#include "relnn/kernels.hpp"

int main(int argc, char** argv) {
  relnn::kernels::apply_thread_env();
  const std::vector<std::string> args(argv + 1, argv + argc);
  return relnn::cli::dispatch(args, std::cout, std::cerr);
}
