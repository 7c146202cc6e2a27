#include <string>
#include <vector>

#include "gcmc/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return gcmc::cli::run_cli(args);
}
