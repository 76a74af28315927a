#include <iostream>
#include <string>
#include <vector>

#include "triage/app.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return triage::app::RunCli(args, std::cout, std::cerr);
}
