// Command-line front door: compile | sample | diagnose.
//
// Exit codes: 0 on success, 1 for input errors (unreadable files, malformed
// programs, failed initialization), 2 for usage errors (bad flags, bad
// SPPL_SEED, models the diagnostic oracle cannot handle).

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sppl/chain_io.hpp"
#include "sppl/density.hpp"
#include "sppl/diagnostics.hpp"
#include "sppl/gmm_match.hpp"
#include "sppl/graph.hpp"
#include "sppl/graph_json.hpp"
#include "sppl/oracle.hpp"
#include "sppl/parser.hpp"
#include "sppl/samplers.hpp"
#include "sppl/stats.hpp"
#include "sppl/util.hpp"
#include "sppl/validate.hpp"
#include "sppl/version.hpp"

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw sppl::SpplError("io", "cannot open '" + path.string() + "'");
  }
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_output(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    throw sppl::SpplError("io", "cannot open '" + out_path + "' for writing");
  }
  out << text;
}

std::map<std::string, double> parse_defines(const std::vector<std::string>& defs) {
  std::map<std::string, double> constants;
  for (const std::string& d : defs) {
    const std::size_t eq = d.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw UsageError("--define expects name=value, got '" + d + "'");
    }
    const std::string name = d.substr(0, eq);
    const std::string value = d.substr(eq + 1);
    double v = 0.0;
    const char* b = value.data();
    auto [ptr, ec] = std::from_chars(b, b + value.size(), v);
    if (ec != std::errc() || ptr != b + value.size()) {
      throw UsageError("--define " + name + ": '" + value + "' is not a number");
    }
    if (!constants.emplace(name, v).second) {
      throw UsageError("--define " + name + " given twice");
    }
  }
  return constants;
}

std::uint64_t effective_seed(const CLI::App& sub, std::uint64_t flag_value) {
  // The flag wins over the environment; the environment wins over the default.
  if (sub.count("--seed") > 0) return flag_value;
  const char* env = std::getenv("SPPL_SEED");
  if (!env || !*env) return flag_value;
  std::uint64_t v = 0;
  const char* b = env;
  const char* e = env + std::string_view(env).size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e) {
    throw UsageError(std::string("SPPL_SEED must be a nonnegative integer, got '") +
                     env + "'");
  }
  return v;
}

sppl::GraphModel load_model(const std::string& source_path,
                            const std::vector<std::string>& defines) {
  const auto constants = parse_defines(defines);
  const std::string source = read_file(source_path);
  const auto program = sppl::parse(source);
  sppl::validate(program, constants);
  return sppl::compile(program, constants);
}

// --- compile ---------------------------------------------------------------

struct CompileArgs {
  std::string source;
  std::string out;
  std::vector<std::string> defines;
};

int run_compile(const CompileArgs& args) {
  const sppl::GraphModel model = load_model(args.source, args.defines);
  for (const std::string& w : model.warnings) {
    std::cerr << args.source << ": warning: " << w << '\n';
  }
  write_output(args.out, sppl::emit_graph(model));
  return kExitOk;
}

// --- sample ----------------------------------------------------------------

struct SampleArgs {
  std::string source;
  std::string out;
  std::string engine = "dhmc";
  std::string format = "csv";
  std::uint64_t seed = 0;
  std::size_t num_samples = 100000;
  std::size_t burn_in = 10000;
  double step_size = 0.1;
  int leapfrog = 20;
  std::optional<double> mass;
  std::vector<std::string> defines;
};

int run_sample(const CLI::App& sub, const SampleArgs& args) {
  const sppl::GraphModel model = load_model(args.source, args.defines);
  const sppl::PiecewiseDensity pd = sppl::build_density(model);

  sppl::SamplerConfig config;
  config.engine = sppl::engine_from_name(args.engine);
  config.step_size = args.step_size;
  config.leapfrog_steps = args.leapfrog;
  config.num_samples = args.num_samples;
  config.burn_in = args.burn_in;
  config.seed = effective_seed(sub, args.seed);
  if (args.mass) config.mass.assign(pd.dim(), *args.mass);

  const auto t0 = std::chrono::steady_clock::now();
  const sppl::ChainResult chain = sppl::run_chain(model, pd, config);
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - t0;

  fs::path out = args.out.empty()
                     ? fs::path(args.source).replace_filename(
                           fs::path(args.source).stem().string() + "_" +
                           args.engine + (args.format == "csv" ? ".csv" : ".jsonl"))
                     : fs::path(args.out);
  if (args.format == "csv") {
    sppl::write_chain_csv(out, chain);
  } else {
    sppl::write_chain_jsonl(out, chain, model);
  }

  sppl::RunManifest manifest;
  manifest.engine = args.engine;
  manifest.seed = config.seed;
  manifest.step_size = config.step_size;
  manifest.leapfrog_steps = config.leapfrog_steps;
  manifest.mass = config.mass;
  manifest.permute_discontinuous = config.permute_discontinuous;
  manifest.num_samples = config.num_samples;
  manifest.burn_in = config.burn_in;
  manifest.source_path = args.source;
  manifest.graph_hash = sppl::fnv1a64(sppl::emit_graph(model));
  manifest.density_evals = chain.density_evals;
  manifest.grad_evals = chain.grad_evals;
  manifest.wall_seconds = elapsed.count();
  manifest.tool_version = sppl::kToolVersion;
  const fs::path manifest_path = out.string() + ".manifest.json";
  sppl::write_manifest(manifest_path, manifest);

  std::cout << "wrote " << chain.num_kept << " samples to " << out.string()
            << " (manifest " << manifest_path.string() << ")\n";
  return kExitOk;
}

// --- diagnose --------------------------------------------------------------

struct DiagnoseArgs {
  std::vector<std::string> chains;
  std::string model;
  std::string functional = "max_mean";
  std::string out;
  std::vector<std::string> defines;
};

int run_diagnose(const DiagnoseArgs& args) {
  const sppl::GraphModel model = load_model(args.model, args.defines);
  const auto rec = sppl::match_gmm(model);
  if (!rec) {
    std::cerr << args.model
              << ": no exact reference is available for this model shape\n";
    return kExitUsage;
  }
  const sppl::ExactPosterior post = sppl::gmm_exact(rec->spec);
  const sppl::Functional f = sppl::functional_from_name(args.functional);
  const double truth = sppl::functional_truth(post, f);

  std::vector<sppl::LoadedChain> chains;
  std::size_t n_min = SIZE_MAX;
  for (const std::string& path : args.chains) {
    chains.push_back(sppl::load_chain(path));
    n_min = std::min(n_min, chains.back().num_rows);
  }
  if (n_min < 10) {
    throw sppl::SpplError("io", "chains must have at least 10 samples");
  }
  const auto ns = sppl::stats::log_spaced(10, n_min, 20);

  const std::vector<std::string> latents = model.latent_names();

  std::vector<std::vector<std::pair<std::size_t, double>>> traces;
  for (std::size_t c = 0; c < chains.size(); ++c) {
    const sppl::LoadedChain& chain = chains[c];
    std::vector<std::size_t> cols;
    for (const std::string& name : rec->mean_coords) {
      // CSV carries coordinate names; JSONL columns are positional, so fall
      // back to the model's latent order when the widths agree.
      auto it = std::find(chain.coords.begin(), chain.coords.end(), name);
      if (it == chain.coords.end() && chain.coords.size() == latents.size()) {
        const auto lt = std::find(latents.begin(), latents.end(), name);
        if (lt != latents.end()) {
          it = chain.coords.begin() + (lt - latents.begin());
        }
      }
      if (it == chain.coords.end()) {
        throw sppl::SpplError("io", "'" + args.chains[c] +
                                        "' has no column for coordinate '" + name +
                                        "'");
      }
      cols.push_back(static_cast<std::size_t>(it - chain.coords.begin()));
    }
    const auto series = sppl::functional_series(
        chain.samples, chain.coords.size(), cols, rec->spec.p0, f);
    traces.push_back(sppl::mse_trace(series, truth, ns));
  }

  const auto bands = sppl::aggregate_traces(traces);
  std::ostringstream os;
  os << "n,median_mse,q20_mse,q80_mse\n";
  for (const auto& b : bands) {
    os << b.n << ',' << sppl::format_double(b.median) << ','
       << sppl::format_double(b.q20) << ',' << sppl::format_double(b.q80) << '\n';
  }
  write_output(args.out, os.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"compile probabilistic programs to graphs, sample them, and "
               "compare chains against exact references"};
  app.set_version_flag("--version", sppl::kToolVersion);
  app.require_subcommand(1);

  CompileArgs cargs;
  CLI::App* compile = app.add_subcommand("compile", "emit the graph as JSON");
  compile->add_option("source", cargs.source, "program file")->required();
  compile->add_option("-o,--out", cargs.out, "output path (default: stdout)");
  compile->add_option("--define", cargs.defines, "model constant name=value");

  SampleArgs sargs;
  CLI::App* sample = app.add_subcommand("sample", "run one MCMC chain");
  sample->add_option("source", sargs.source, "program file")->required();
  sample->add_option("--engine", sargs.engine, "sampling engine")
      ->check(CLI::IsMember({"hmc", "dhmc", "mwg"}));
  sample->add_option("--seed", sargs.seed, "run seed (beats SPPL_SEED)");
  sample->add_option("--samples", sargs.num_samples, "kept samples");
  sample->add_option("--burnin", sargs.burn_in, "discarded warmup steps");
  sample->add_option("--step-size", sargs.step_size, "integrator step size");
  sample->add_option("--leapfrog", sargs.leapfrog, "leapfrog steps per proposal");
  double mass_value = 1.0;
  CLI::Option* mass_opt =
      sample->add_option("--mass", mass_value, "uniform mass for all coordinates");
  sample->add_option("--format", sargs.format, "output format")
      ->check(CLI::IsMember({"csv", "jsonl"}));
  sample->add_option("-o,--out", sargs.out, "output path");
  sample->add_option("--define", sargs.defines, "model constant name=value");

  DiagnoseArgs dargs;
  CLI::App* diagnose =
      app.add_subcommand("diagnose", "error-vs-n bands against the exact answer");
  diagnose->add_option("chains", dargs.chains, "sample files (.csv or .jsonl)")
      ->required();
  diagnose->add_option("--model", dargs.model, "program the chains came from")
      ->required();
  diagnose->add_option("--functional", dargs.functional, "posterior functional")
      ->check(CLI::IsMember({"min_mean", "max_mean", "predictive_mean"}));
  diagnose->add_option("-o,--out", dargs.out, "output path (default: stdout)");
  diagnose->add_option("--define", dargs.defines, "model constant name=value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << '\n';
    return kExitUsage;
  }

  const std::string source = compile->parsed() ? cargs.source
                             : sample->parsed() ? sargs.source
                                                : dargs.model;
  try {
    if (compile->parsed()) return run_compile(cargs);
    if (sample->parsed()) {
      if (mass_opt->count() > 0) sargs.mass = mass_value;
      return run_sample(*sample, sargs);
    }
    return run_diagnose(dargs);
  } catch (const UsageError& e) {
    std::cerr << e.what() << '\n';
    return kExitUsage;
  } catch (const sppl::SpplError& e) {
    std::cerr << sppl::format_diagnostic(source, e) << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInput;
  }
}
