// Rule-table entailment backend speaking the stdio wire protocol. Useful for
// exercising the process transport without an ML runtime.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "stancekit/nli_gateway.hpp"

namespace nli = stancekit::nli;

int main(int argc, char** argv) {
  CLI::App app{"Mock entailment backend (line-delimited JSON over stdin/stdout)"};
  std::string rules_path;
  bool concurrent = false;
  long exit_after = -1;
  double scale = 1.0;
  app.add_option("--rules", rules_path, "Mock rules JSON file")->required()->check(CLI::ExistingFile);
  app.add_flag("--concurrent", concurrent, "Declare concurrency support in the handshake");
  app.add_option("--exit-after", exit_after, "Exit abruptly after this many responses");
  app.add_option("--scale", scale, "Multiply every probability (to emit off-unit sums)");
  CLI11_PARSE(app, argc, argv);

  std::unique_ptr<nli::MockScorer> scorer;
  try {
    scorer = nli::load_mock_scorer(rules_path);
  } catch (const std::exception& e) {
    std::cerr << "mock backend: " << e.what() << '\n';
    return 2;
  }

  std::cout << nli::encode_handshake({nli::kProtocolVersion, concurrent}) << std::endl;
  std::string line;
  long served = 0;
  while (std::getline(std::cin, line)) {
    if (line.empty()) continue;
    if (exit_after >= 0 && served >= exit_after) std::_Exit(3);
    try {
      const auto request = nli::decode_request(line);
      const auto d = scorer->lookup(request.premise, request.hypothesis);
      std::cout << nli::encode_response({request.id, d.entailment * scale, d.neutral * scale, d.contradiction * scale})
                << std::endl;
    } catch (const std::exception& e) {
      std::cout << nli::encode_error_response(std::nullopt, e.what()) << std::endl;
    }
    ++served;
  }
  return 0;
}
