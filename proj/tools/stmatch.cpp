#include <stmatch/cli.hpp>

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return stmatch::run_cli(args);
}
