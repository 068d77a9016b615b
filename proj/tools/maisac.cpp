// SPDX-License-Identifier: Apache-2.0
// maisac: seeded experiment driver for the movable-antenna ISAC library.

#include "maisac/run.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

namespace {

std::size_t default_threads() {
  if (const char* env = std::getenv("MAISAC_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    maisac::fail(maisac::ErrorKind::kInvalidArgument,
                 std::string("MAISAC_THREADS must be a positive integer (got '") + env + "')");
  }
  return 1;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t end = std::min(text.find(',', pos), text.size());
    const std::string item = text.substr(pos, end - pos);
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (item.empty() || used != item.size() || item[0] == '-') {
      maisac::fail(maisac::ErrorKind::kInvalidArgument, "--seeds expects non-negative integers (got '" + item + "')");
    }
    out.push_back(v);
    pos = end + 1;
  }
  return out;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Movable-antenna near-field ISAC optimizer"};
  std::string config_path, preset = "table1", cmd = "solve", out = "out";
  std::optional<std::size_t> gamma, threads;
  std::optional<std::string> seeds;
  std::vector<std::string> overrides;
  bool timing = false, print_config = false;

  app.add_option("--config", config_path, "JSON configuration file (keys documented in docs/config.md)");
  app.add_option("--preset", preset, "base configuration when --config is absent")
      ->check(CLI::IsMember({"table1", "desk"}));
  app.add_option("--cmd", cmd, "command")->check(CLI::IsMember({"solve", "sweep", "apm", "beampattern", "baselines"}));
  app.add_option("--gamma", gamma, "number of random candidate layouts")->check(CLI::PositiveNumber);
  app.add_option("--seeds", seeds, "comma-separated seed list, replaces the configured seeds (empty: none)");
  app.add_option("--out", out, "output directory");
  app.add_option("--threads", threads, "worker threads (default: MAISAC_THREADS or 1)")->check(CLI::PositiveNumber);
  app.add_option("--set", overrides, "override a configuration key, e.g. --set num_tx=4")->take_all();
  app.add_flag("--timing", timing, "record wall-clock times (makes outputs run-dependent)");
  app.add_flag("--print-config", print_config, "print the effective configuration and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(maisac::ErrorKind::kInvalidArgument);
  }

  maisac::json doc = config_path.empty() ? (preset == "desk" ? maisac::desk_config() : maisac::default_config())
                                         : maisac::load_config_file(config_path);
  doc = maisac::effective_config(doc);
  for (const auto& o : overrides) maisac::apply_override(doc, o);
  if (gamma) doc["gamma"] = *gamma;
  if (seeds) doc["seeds"] = parse_seeds(*seeds);

  maisac::RunConfig rc;
  rc.command = maisac::parse_command(cmd);
  rc.document = maisac::effective_config(doc);
  rc.out_dir = out;
  rc.threads = threads ? *threads : default_threads();
  rc.timing = timing;
  if (print_config) {
    std::cout << rc.document.dump(2) << "\n";
    return 0;
  }

  const maisac::ResultsBundle bundle = maisac::run(rc);
  const auto files = maisac::write_results(bundle, rc.out_dir);
  std::cerr << "maisac " << cmd << ": wrote " << files.size() << " files to " << rc.out_dir
            << " (config hash " << bundle.manifest["config_hash_fnv1a64"].get<std::string>() << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const maisac::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
