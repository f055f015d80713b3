#include <iostream>
#include <string>
#include <vector>

#include "eoscript/mock_tools.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return eoscript::mock_tool_main(args, std::cin, std::cout, std::cerr);
}
