#pragma once

// Shared fixtures for the test suite: canonical model sources, compilation
// shortcuts, and a small random-program generator for fuzz properties.

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sppl/density.hpp"
#include "sppl/gmm_match.hpp"
#include "sppl/graph.hpp"
#include "sppl/oracle.hpp"
#include "sppl/parser.hpp"
#include "sppl/rng.hpp"
#include "sppl/util.hpp"
#include "sppl/validate.hpp"

namespace test {

// The branch-conditioned observation model in the two desugared spellings.
// The `<` spelling puts the below-threshold observation in the then branch,
// so its predicate is (- x1 0.3) and a tie activates the normal(1,1) factor.
// The `>` spelling is the canonical one: its predicate is (- 0.3 x1) and a
// tie activates the normal(0,1) factor, matching the I(x>q) / I(x<=q) split.
inline constexpr const char* kProgram2Less =
    "(let [x (sample (uniform 0 1))]"
    " (if (< x 0.3) (observe (normal 0 1) 0.2) (observe (normal 1 1) 0.2)))";

inline constexpr const char* kProgram2 =
    "(let [x (sample (uniform 0 1))]"
    " (if (> x 0.3) (observe (normal 1 1) 0.2) (observe (normal 0 1) 0.2)))";

inline constexpr const char* kProgram2Datum1 =
    "(let [x (sample (uniform 0 1))]"
    " (if (> x 0.3) (observe (normal 1 1) 1.0) (observe (normal 0 1) 1.0)))";

// Prior-only variant: y's marginal is 0.3 N(0,1) + 0.7 N(1,1).
inline constexpr const char* kProgram2Latent =
    "(let [x (sample (uniform 0 1))]"
    " (sample (normal (if (< x 0.3) 0 1) 1)))";

// Prior N(0, 2), one observation y = 1 with unit noise: posterior N(0.8, 0.8).
inline constexpr const char* kConjugate =
    "(let [mu (sample (normal 0 2))] (observe (normal mu 1) 1))";

inline std::string gmm_source() {
  return sppl::render_gmm_source(sppl::GmmSpec::benchmark());
}

struct Compiled {
  sppl::GraphModel model;
  sppl::PiecewiseDensity pd;
};

inline sppl::GraphModel compile_source(
    const std::string& source,
    const std::map<std::string, double>& constants = {}) {
  return sppl::compile(sppl::validate(sppl::parse(source), constants),
                       constants);
}

inline Compiled build(const std::string& source,
                      const std::map<std::string, double>& constants = {}) {
  sppl::GraphModel model = compile_source(source, constants);
  sppl::PiecewiseDensity pd = sppl::build_density(model);
  return {std::move(model), std::move(pd)};
}

inline std::filesystem::path models_dir() { return SPPL_MODELS_DIR; }

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// --- random grammar-valid programs (no stochastic guards, no shadowed
// reserved names) for fuzz properties -------------------------------------

struct ProgramGen {
  sppl::RandomStream rng;
  int stochastic_count = 0;

  explicit ProgramGen(std::uint64_t seed) : rng(seed) {}

  std::string number() {
    const double v = (rng.uniform01() - 0.5) * 20.0;
    return sppl::format_double(v);
  }

  // A deterministic expression over the variables in scope.
  std::string value_expr(const std::vector<std::string>& scope, int depth) {
    const std::uint64_t pick = rng.below(scope.empty() ? 5 : 6);
    if (depth <= 0 || pick == 0) return number();
    switch (pick) {
      case 1: return "(+ " + value_expr(scope, depth - 1) + " " +
                     value_expr(scope, depth - 1) + ")";
      case 2: return "(* " + value_expr(scope, depth - 1) + " " +
                     value_expr(scope, depth - 1) + ")";
      case 3: return "(- " + value_expr(scope, depth - 1) + ")";
      case 4: return "(exp " + value_expr(scope, depth - 1) + ")";
      default: return scope[rng.below(scope.size())];
    }
  }

  std::string dist(const std::vector<std::string>& scope, int depth) {
    if (rng.below(2) == 0) {
      return "(normal " + value_expr(scope, depth) + " 1)";
    }
    return "(uniform 0 1)";
  }

  std::string program(std::vector<std::string> scope, int depth) {
    const std::uint64_t pick = rng.below(6);
    if (depth <= 0 || pick == 0) {
      ++stochastic_count;
      return "(sample " + dist(scope, 1) + ")";
    }
    switch (pick) {
      case 1: {
        const std::string binder = "v" + std::to_string(rng.below(1000));
        const std::string bound = program(scope, depth - 1);
        scope.push_back(binder);
        return "(let [" + binder + " " + bound + "] " +
               program(scope, depth - 1) + ")";
      }
      case 2: {
        const char* cmp = (rng.below(2) == 0) ? "<" : ">=";
        // Prefer a variable on the left so the guard usually survives to a
        // predicate instead of constant-folding a branch away.
        const std::string lhs = (!scope.empty() && rng.below(4) != 0)
                                    ? scope[rng.below(scope.size())]
                                    : value_expr(scope, 1);
        return "(if (" + std::string(cmp) + " " + lhs + " " +
               value_expr(scope, 1) + ") " + program(scope, depth - 1) + " " +
               program(scope, depth - 1) + ")";
      }
      case 3: {
        ++stochastic_count;
        return "(observe " + dist(scope, 1) + " " + number() + ")";
      }
      default: {
        ++stochastic_count;
        return "(sample " + dist(scope, 1) + ")";
      }
    }
  }

  std::string next() {
    stochastic_count = 0;
    // Half the programs open with a sampled binder so conditionals further
    // down have a latent to test.
    if (rng.below(2) == 0) {
      const std::string binder = "v" + std::to_string(rng.below(1000));
      ++stochastic_count;
      return "(let [" + binder + " (sample (normal 0 1))] " +
             program({binder}, 3) + ")";
    }
    return program({}, 3);
  }
};

// --- subprocess driver for the CLI tests ----------------------------------

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

#ifdef SPPL_CLI_PATH
inline std::filesystem::path cli_path() { return SPPL_CLI_PATH; }

// Runs `env_prefix cli args` through the shell, capturing both streams.
inline CliResult run_cli(const std::string& args,
                         const std::string& env_prefix = "") {
  namespace fs = std::filesystem;
  static int counter = 0;
  const fs::path base =
      fs::temp_directory_path() / ("sppl_cli_" + std::to_string(++counter));
  const fs::path out_path = base.string() + ".out";
  const fs::path err_path = base.string() + ".err";
  const std::string cmd = env_prefix + (env_prefix.empty() ? "" : " ") + "'" +
                          cli_path().string() + "' " + args + " > '" +
                          out_path.string() + "' 2> '" + err_path.string() +
                          "'";
  const int status = std::system(cmd.c_str());
  CliResult res;
  res.exit_code = (status >= 0 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
  res.out = read_file(out_path);
  res.err = read_file(err_path);
  fs::remove(out_path);
  fs::remove(err_path);
  return res;
}

// Scratch directory wiped per use.
inline std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_file(const std::filesystem::path& path,
                       const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}
#endif  // SPPL_CLI_PATH

}  // namespace test
