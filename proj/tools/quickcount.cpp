#include <string>
#include <vector>

#include "quickcount/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return quickcount::cli::dispatch(std::move(args));
}
