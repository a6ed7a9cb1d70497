#include <string>
#include <vector>

#include "tsql/cli.hpp"

int main(int argc, char** argv) {
  return tsql::cli::dispatch(std::vector<std::string>(argv + 1, argv + argc));
}
