// Writes the bundled sample dataset (data/synthetic_bugs.csv).

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "support/synthetic.h"

int main(int argc, char** argv) {
  CLI::App cli{"Generate a planted bug-report stream"};
  std::string output = "synthetic_bugs.csv";
  std::size_t reports = 400;
  std::uint64_t seed = 2024;
  cli.add_option("-o,--output", output, "Destination CSV");
  cli.add_option("-n,--reports", reports, "Number of reports");
  cli.add_option("--seed", seed, "Generator seed");
  CLI11_PARSE(cli, argc, argv);

  const auto spec = triage::testing::SampleStream(reports, seed);
  const auto stream = triage::testing::GenerateStream(spec);
  std::ofstream out(output, std::ios::binary);
  if (!out) {
    std::cerr << "cannot write " << output << "\n";
    return 2;
  }
  out << triage::testing::ToCsv(stream);
  std::cout << "wrote " << stream.size() << " reports to " << output << "\n";
  return 0;
}
