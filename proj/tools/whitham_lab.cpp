#include <spdlog/spdlog.h>

#include <cstdio>
#include <cstring>
#include <exception>
#include <iostream>

#include "whitham/config.hpp"
#include "whitham/harness.hpp"

namespace {

bool asked_for_help(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "-h") || !std::strcmp(argv[i], "--help")) return true;
  }
  return false;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace whitham;
  cli::ParseOutcome parsed;
  try {
    parsed = cli::parse_command_line(argc, argv);
  } catch (const cli::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  if (parsed.help) {
    std::cout << parsed.usage;
    return asked_for_help(argc, argv) ? 0 : 2;
  }
  const auto& cfg = parsed.config;
  try {
    const auto report = harness::execute(cfg);
    if (cfg.subcommand == "classify") std::cout << report.notes.at("classification") << "\n";
    for (const auto& c : report.criteria) {
      std::cout << (c.pass ? "PASS " : "FAIL ") << c.id << ": " << c.detail << "\n";
    }
    std::cout << "report written to " << cfg.out << "/report.json\n";
    return report.all_pass() ? 0 : 1;
  } catch (const cli::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
}
