#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sppl/samplers.hpp"

namespace sppl {

// CSV: one header row of coordinate names, one row per kept sample, floats
// rendered as shortest round-trip decimals.
std::string chain_to_csv(const ChainResult& chain);
void write_chain_csv(const std::filesystem::path& path, const ChainResult& chain);

// JSONL: one object per kept sample with step index, state, and metadata;
// flips are rendered as predicate ids.  A non-finite energy error (rejected
// divergent proposal) is written as null.
std::string chain_to_jsonl(const ChainResult& chain, const GraphModel& model);
void write_chain_jsonl(const std::filesystem::path& path, const ChainResult& chain,
                       const GraphModel& model);

// Samples read back from either format (decided by extension: .csv or
// .jsonl).  Metadata is not reloaded; diagnostics only need the draws.
struct LoadedChain {
  std::vector<std::string> coords;
  std::size_t num_rows = 0;
  std::vector<double> samples;  // row-major
};
LoadedChain load_chain(const std::filesystem::path& path);

// Reproducibility sidecar written next to sample output.
struct RunManifest {
  std::string engine;
  std::uint64_t seed = 0;
  double step_size = 0.0;
  int leapfrog_steps = 0;
  std::vector<double> mass;  // as configured; empty = unit masses
  bool permute_discontinuous = true;
  std::size_t num_samples = 0;
  std::size_t burn_in = 0;
  std::string source_path;
  std::uint64_t graph_hash = 0;  // fnv1a64 of the serialized graph
  std::uint64_t density_evals = 0;
  std::uint64_t grad_evals = 0;
  double wall_seconds = 0.0;
  std::string tool_version;
};
std::string manifest_to_json(const RunManifest& m);
void write_manifest(const std::filesystem::path& path, const RunManifest& m);

}  // namespace sppl
