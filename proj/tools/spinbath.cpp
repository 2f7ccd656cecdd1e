// spinbath CLI: run a scenario config, validate one, or list scenarios.
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "spinbath/config.hpp"
#include "spinbath/errors.hpp"
#include "spinbath/runner.hpp"
#include "spinbath/version.hpp"

namespace {

constexpr const char* kUsage = R"(spinbath — central-spin decoherence simulator

usage:
  spinbath run <config> [--output-dir DIR] [--threads N] [--seed-override S]
  spinbath validate <config>
  spinbath scenarios
  spinbath --version | --help

subcommands:
  run        parse, validate and execute a scenario config; write
             summary.csv, a manifest and scenario data files
  validate   parse and validate a config, then print its canonical echo
  scenarios  list the available scenario names

options:
  --output-dir DIR    write outputs here instead of the config's output_dir
  --threads N         worker threads (default 1; results are thread-count
                      independent)
  --seed-override S   replace the config's base seed (decimal, 0x-hex ok)

exit codes:
  0 success   2 argument/config error   3 capacity exceeded   4 I/O error
)";

constexpr const char* kScenarioHelp = R"(evolve            coherence traces plus overlap/efficiency/decay metrics
overlap-vs-kappa  largest ground-state overlap across a kappa sweep
overlap-vs-delta  largest ground-state overlap across a delta sweep
correlation-scan  random (omega, delta) samples: overlap vs efficiency
eigenflow         low-lying eigenvalues and overlaps along a delta grid
spacing           nearest-neighbour level-spacing statistics
thermal           largest expansion term of thermal initial states
field-sweep       largest ground-state overlap across an h_ext sweep
)";

struct CliOptions {
  std::string config_path;
  std::string output_dir;  // empty: use the config's output_dir
  unsigned threads = 1;
  std::optional<std::uint64_t> seed_override;
};

std::string need_value(int argc, char** argv, int& i, const char* flag) {
  if (i + 1 >= argc)
    throw spinbath::ArgumentError(std::string(flag) + " expects a value");
  return argv[++i];
}

CliOptions parse_cli(int argc, char** argv, int first) {
  CliOptions opt;
  for (int i = first; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--output-dir") {
      opt.output_dir = need_value(argc, argv, i, "--output-dir");
    } else if (arg == "--threads") {
      const std::string v = need_value(argc, argv, i, "--threads");
      try {
        const long n = std::stol(v);
        if (n < 1) throw spinbath::ArgumentError("--threads must be >= 1");
        opt.threads = static_cast<unsigned>(n);
      } catch (const std::logic_error&) {
        throw spinbath::ArgumentError("--threads expects a positive integer");
      }
    } else if (arg == "--seed-override") {
      const std::string v = need_value(argc, argv, i, "--seed-override");
      try {
        opt.seed_override = std::stoull(v, nullptr, 0);
      } catch (const std::logic_error&) {
        throw spinbath::ArgumentError("--seed-override expects an integer");
      }
    } else if (!arg.empty() && arg[0] == '-') {
      throw spinbath::ArgumentError("unknown option " + arg);
    } else if (opt.config_path.empty()) {
      opt.config_path = arg;
    } else {
      throw spinbath::ArgumentError("unexpected argument " + arg);
    }
  }
  if (opt.config_path.empty())
    throw spinbath::ArgumentError("missing <config> path");
  return opt;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw spinbath::IoError("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw spinbath::IoError("cannot read " + path);
  return buffer.str();
}

spinbath::ScenarioConfig load(const CliOptions& opt) {
  spinbath::ScenarioConfig cfg = spinbath::parse_config(read_file(opt.config_path));
  if (opt.seed_override) cfg.model.seed = *opt.seed_override;
  spinbath::validate_config(cfg);
  return cfg;
}

int run_main(int argc, char** argv, int first) {
  const CliOptions opt = parse_cli(argc, argv, first);
  const spinbath::ScenarioConfig cfg = load(opt);
  const std::string dir = opt.output_dir.empty() ? cfg.output_dir : opt.output_dir;
  const spinbath::RunSummary summary =
      spinbath::run_scenario(cfg, dir, opt.threads);
  char hash[24];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(summary.config_hash));
  std::cout << "wrote " << summary.rows.size() << " records to " << dir
            << " (config " << hash << ", " << summary.wall_seconds << " s)\n";
  return 0;
}

int validate_main(int argc, char** argv, int first) {
  const CliOptions opt = parse_cli(argc, argv, first);
  const spinbath::ScenarioConfig cfg = load(opt);
  std::cout << spinbath::canonical_echo(cfg);
  std::cout << "ok\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    if (argc < 2) {
      std::cerr << kUsage;
      return 2;
    }
    const std::string cmd = argv[1];
    if (cmd == "--help" || cmd == "-h" || cmd == "help") {
      std::cout << kUsage;
      return 0;
    }
    if (cmd == "--version" || cmd == "version") {
      std::cout << "spinbath " << spinbath::kVersion << '\n';
      return 0;
    }
    if (cmd == "scenarios") {
      std::cout << kScenarioHelp;
      return 0;
    }
    if (cmd == "run") return run_main(argc, argv, 2);
    if (cmd == "validate") return validate_main(argc, argv, 2);
    throw spinbath::ArgumentError("unknown subcommand " + cmd);
  } catch (const spinbath::CapacityError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const spinbath::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const spinbath::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const spinbath::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const spinbath::ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const spinbath::InsufficientDataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
}
