#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "cclass/cli.hpp"
#include "support.hpp"

namespace oracle {

/// Runs the CLI in-process with captured streams.
struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

inline CliResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "cclass");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliResult r;
  r.code = cclass::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

}  // namespace oracle
