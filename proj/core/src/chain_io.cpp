#include "sppl/chain_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "sppl/diagnostics.hpp"
#include "sppl/util.hpp"
#include "sppl/version.hpp"

namespace sppl {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw SpplError("io", msg); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) fail("failed writing '" + path.string() + "'");
}

double parse_double(std::string_view s) {
  double v = 0.0;
  const char* b = s.data();
  auto [ptr, ec] = std::from_chars(b, b + s.size(), v);
  if (ec != std::errc() || ptr != b + s.size()) {
    fail("malformed number '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::string chain_to_csv(const ChainResult& chain) {
  std::ostringstream os;
  for (std::size_t i = 0; i < chain.coords.size(); ++i) {
    if (i) os << ',';
    os << chain.coords[i];
  }
  os << '\n';
  for (std::size_t r = 0; r < chain.num_kept; ++r) {
    const auto row = chain.row(r);
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      os << format_double(row[i]);
    }
    os << '\n';
  }
  return os.str();
}

void write_chain_csv(const std::filesystem::path& path, const ChainResult& chain) {
  write_text(path, chain_to_csv(chain));
}

std::string chain_to_jsonl(const ChainResult& chain, const GraphModel& model) {
  std::ostringstream os;
  for (std::size_t r = 0; r < chain.num_kept; ++r) {
    json j;
    j["step"] = r;
    const auto row = chain.row(r);
    j["state"] = std::vector<double>(row.begin(), row.end());
    const StepMeta& m = chain.meta[r];
    j["accepted"] = m.accepted;
    j["log_density"] = m.log_density;
    if (std::isfinite(m.energy_error)) {
      j["energy_error"] = m.energy_error;
    } else {
      j["energy_error"] = nullptr;  // rejected divergence: no finite error
    }
    json flips = json::array();
    for (std::uint32_t idx : m.flips) {
      flips.push_back(idx < model.predicates.size() ? model.predicates[idx].id
                                                    : std::to_string(idx));
    }
    j["flips"] = flips;
    os << j.dump() << '\n';
  }
  return os.str();
}

void write_chain_jsonl(const std::filesystem::path& path, const ChainResult& chain,
                       const GraphModel& model) {
  write_text(path, chain_to_jsonl(chain, model));
}

LoadedChain load_chain(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open '" + path.string() + "'");
  const std::string ext = path.extension().string();

  LoadedChain chain;
  std::string line;
  if (ext == ".csv") {
    if (!std::getline(in, line)) fail("'" + path.string() + "' has no header row");
    std::stringstream header(line);
    std::string field;
    while (std::getline(header, field, ',')) chain.coords.push_back(field);
    if (chain.coords.empty()) fail("'" + path.string() + "' has an empty header");
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::size_t start = 0, got = 0;
      for (;;) {
        const std::size_t comma = line.find(',', start);
        const std::string_view cell(line.data() + start,
                                    (comma == std::string::npos ? line.size() : comma) -
                                        start);
        chain.samples.push_back(parse_double(cell));
        ++got;
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      if (got != chain.coords.size()) {
        fail("row " + std::to_string(chain.num_rows + 2) + " of '" + path.string() +
             "' has " + std::to_string(got) + " fields, header has " +
             std::to_string(chain.coords.size()));
      }
      ++chain.num_rows;
    }
    return chain;
  }

  if (ext == ".jsonl") {
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error& e) {
        fail("'" + path.string() + "' line " + std::to_string(lineno) + ": " + e.what());
      }
      if (!j.contains("state") || !j["state"].is_array()) {
        fail("'" + path.string() + "' line " + std::to_string(lineno) +
             ": no state array");
      }
      if (chain.coords.empty()) {
        // JSONL carries no names; synthesize stable column labels.
        for (std::size_t i = 0; i < j["state"].size(); ++i) {
          chain.coords.push_back("x" + std::to_string(i + 1));
        }
      }
      if (j["state"].size() != chain.coords.size()) {
        fail("'" + path.string() + "' line " + std::to_string(lineno) +
             ": state size changed mid-file");
      }
      for (const auto& v : j["state"]) chain.samples.push_back(v.get<double>());
      ++chain.num_rows;
    }
    if (chain.num_rows == 0) fail("'" + path.string() + "' contains no samples");
    return chain;
  }

  fail("unsupported extension '" + ext + "' (expected .csv or .jsonl)");
}

std::string manifest_to_json(const RunManifest& m) {
  json j;
  j["manifest_version"] = kManifestVersion;
  j["engine"] = m.engine;
  j["seed"] = m.seed;
  j["step_size"] = m.step_size;
  j["leapfrog_steps"] = m.leapfrog_steps;
  j["mass"] = m.mass;
  j["permute_discontinuous"] = m.permute_discontinuous;
  j["num_samples"] = m.num_samples;
  j["burn_in"] = m.burn_in;
  j["source_path"] = m.source_path;
  j["graph_hash"] = m.graph_hash;
  j["density_evals"] = m.density_evals;
  j["grad_evals"] = m.grad_evals;
  j["wall_seconds"] = m.wall_seconds;
  j["tool_version"] = m.tool_version;
  return j.dump(2) + "\n";
}

void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
  write_text(path, manifest_to_json(m));
}

}  // namespace sppl
