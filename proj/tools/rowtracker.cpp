#include <iostream>
#include <string>
#include <vector>

#include "rowtracker/cli.hpp"

int main(int argc, char** argv) {
  return rowtracker::dispatch(std::vector<std::string>(argv + 1, argv + argc), std::cout,
                              std::cerr);
}
