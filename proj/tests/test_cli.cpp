// End-to-end tests for the command-line tool, driven as a subprocess.
//
// Each case spawns the real binary (path injected by the build as
// SPPL_CLI_PATH) and checks exit codes, stream routing, and the on-disk
// formats: graph JSON on stdout, CSV/JSONL sample files, the manifest
// sidecar, and the diagnose band table.

#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "json.hpp"
#include "sppl/chain_io.hpp"
#include "sppl/density.hpp"
#include "sppl/gmm_match.hpp"
#include "sppl/graph_json.hpp"
#include "sppl/oracle.hpp"
#include "sppl/samplers.hpp"
#include "sppl/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string model_path(const std::string& name) {
  return (test::models_dir() / name).string();
}

// Splits subprocess stdout/file text into non-empty lines.
std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

json manifest_next_to(const fs::path& out) {
  return json::parse(test::read_file(out.string() + ".manifest.json"));
}

}  // namespace

TEST_CASE("version, help, and missing subcommand") {
  const auto version = test::run_cli("--version");
  CHECK(version.exit_code == 0);
  CHECK(version.out == "0.1.0\n");

  const auto help = test::run_cli("--help");
  CHECK(help.exit_code == 0);
  CHECK(help.out.find("compile") != std::string::npos);
  CHECK(help.out.find("sample") != std::string::npos);
  CHECK(help.out.find("diagnose") != std::string::npos);

  const auto bare = test::run_cli("");
  CHECK(bare.exit_code == 2);
  CHECK(bare.err.find("subcommand is required") != std::string::npos);

  const auto unknown = test::run_cli("transpile foo.sppl");
  CHECK(unknown.exit_code == 2);
}

TEST_CASE("compile writes the graph JSON to stdout or a file") {
  const std::string source = test::read_file(model_path("program2.sppl"));
  const std::string want = sppl::emit_graph(test::compile_source(source));

  SUBCASE("stdout") {
    const auto r = test::run_cli("compile " + model_path("program2.sppl"));
    CHECK(r.exit_code == 0);
    CHECK(r.err.empty());
    CHECK(r.out == want);
    // The output is valid JSON and re-ingests to an equal model.
    const sppl::GraphModel back = sppl::ingest_graph(r.out);
    CHECK(sppl::models_equal(back, test::compile_source(source)));
  }

  SUBCASE("--out file, stdout stays empty") {
    const auto dir = test::fresh_dir("sppl_cli_compile");
    const auto out = dir / "p2.json";
    const auto r = test::run_cli("compile " + model_path("program2.sppl") +
                                 " -o " + out.string());
    CHECK(r.exit_code == 0);
    CHECK(r.out.empty());
    CHECK(test::read_file(out) == want);
  }

  SUBCASE("constant guards warn on stderr but still compile") {
    const auto dir = test::fresh_dir("sppl_cli_warn");
    const auto src = dir / "folded.sppl";
    test::write_file(src, "(if (< 1 2) (sample (normal 0 1)) 5)");
    const auto r = test::run_cli("compile " + src.string());
    CHECK(r.exit_code == 0);
    CHECK(r.err.find("warning: constant guard (-1)") != std::string::npos);
    CHECK(r.err.find("unreached branch is dropped") != std::string::npos);
    CHECK(!r.out.empty());
    CHECK(sppl::ingest_graph(r.out).vertices.size() == 1);
  }
}

TEST_CASE("compile failures report file:line:col and exit 1") {
  const auto dir = test::fresh_dir("sppl_cli_bad");

  SUBCASE("parse error") {
    const auto src = dir / "broken.sppl";
    test::write_file(src, "(let [x (sample (normal 0 1))]\n  (if x 1 2))");
    const auto r = test::run_cli("compile " + src.string());
    CHECK(r.exit_code == 1);
    CHECK(r.out.empty());
    // format: <path>:<line>:<col>: <message>
    CHECK(r.err.rfind(src.string() + ":2:7: ", 0) == 0);
  }

  SUBCASE("unreadable file") {
    const auto r = test::run_cli("compile " + (dir / "absent.sppl").string());
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("cannot open") != std::string::npos);
  }

  SUBCASE("missing required source argument") {
    const auto r = test::run_cli("compile");
    CHECK(r.exit_code == 2);
  }
}

TEST_CASE("--define supplies model constants") {
  const auto dir = test::fresh_dir("sppl_cli_define");
  const auto src = dir / "threshold.sppl";
  test::write_file(src,
                   "(let [x (sample (uniform 0 1))]"
                   " (if (< x q) (observe (normal 0 1) 0.2)"
                   " (observe (normal 1 1) 0.2)))");

  SUBCASE("defined constant folds into the graph") {
    const auto r = test::run_cli("compile " + src.string() + " --define q=0.3");
    CHECK(r.exit_code == 0);
    // Identical to the graph with the literal threshold spelled inline.
    CHECK(r.out == sppl::emit_graph(test::compile_source(test::kProgram2Less)));
  }

  SUBCASE("missing definition is an unbound variable") {
    const auto r = test::run_cli("compile " + src.string());
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("unbound variable 'q'") != std::string::npos);
    CHECK(r.err.rfind(src.string() + ":", 0) == 0);
  }

  SUBCASE("malformed and duplicate definitions are usage errors") {
    const auto bad = test::run_cli("compile " + src.string() + " --define q=abc");
    CHECK(bad.exit_code == 2);
    CHECK(bad.err.find("is not a number") != std::string::npos);

    const auto dup = test::run_cli("compile " + src.string() +
                                   " --define q=0.3 --define q=0.4");
    CHECK(dup.exit_code == 2);
    CHECK(dup.err.find("given twice") != std::string::npos);

    const auto noname = test::run_cli("compile " + src.string() + " --define =3");
    CHECK(noname.exit_code == 2);
  }
}

TEST_CASE("sample writes CSV plus a manifest sidecar") {
  const auto dir = test::fresh_dir("sppl_cli_sample");
  const auto out = dir / "c.csv";
  const auto r = test::run_cli("sample " + model_path("conjugate.sppl") +
                               " --samples 50 --burnin 10 --seed 3 -o " +
                               out.string());
  CHECK(r.exit_code == 0);
  CHECK(r.out == "wrote 50 samples to " + out.string() + " (manifest " +
                     out.string() + ".manifest.json)\n");

  const auto csv = lines_of(test::read_file(out));
  REQUIRE(csv.size() == 51);
  CHECK(csv[0] == "mu1");
  for (std::size_t i = 1; i < csv.size(); ++i) {
    CHECK(std::isfinite(std::stod(csv[i])));
  }

  // The library reader round-trips what the tool wrote.
  const sppl::LoadedChain back = sppl::load_chain(out);
  CHECK(back.coords == std::vector<std::string>{"mu1"});
  CHECK(back.num_rows == 50);

  const json m = manifest_next_to(out);
  CHECK(m.at("manifest_version") == 1);
  CHECK(m.at("engine") == "dhmc");
  CHECK(m.at("seed") == 3);
  CHECK(m.at("step_size") == 0.1);
  CHECK(m.at("leapfrog_steps") == 20);
  CHECK(m.at("mass") == json::array());
  CHECK(m.at("permute_discontinuous") == true);
  CHECK(m.at("num_samples") == 50);
  CHECK(m.at("burn_in") == 10);
  CHECK(m.at("source_path") == model_path("conjugate.sppl"));
  CHECK(m.at("density_evals").get<std::uint64_t>() > 0);
  CHECK(m.at("grad_evals").get<std::uint64_t>() > 0);
  CHECK(m.at("wall_seconds").get<double>() >= 0.0);
  CHECK(m.at("tool_version") == "0.1.0");

  // graph_hash commits to the serialized graph of the compiled source.
  const std::string source = test::read_file(model_path("conjugate.sppl"));
  const std::uint64_t want_hash =
      sppl::fnv1a64(sppl::emit_graph(test::compile_source(source)));
  CHECK(m.at("graph_hash").get<std::uint64_t>() == want_hash);
}

TEST_CASE("sample defaults, determinism, and edge configurations") {
  SUBCASE("same seed reproduces the file byte for byte") {
    const auto dir = test::fresh_dir("sppl_cli_repro");
    const std::string args = "sample " + model_path("program2.sppl") +
                             " --samples 200 --burnin 50 --seed 11 -o ";
    test::run_cli(args + (dir / "a.csv").string());
    test::run_cli(args + (dir / "b.csv").string());
    CHECK(test::read_file(dir / "a.csv") == test::read_file(dir / "b.csv"));

    const auto r = test::run_cli("sample " + model_path("program2.sppl") +
                                 " --samples 200 --burnin 50 --seed 12 -o " +
                                 (dir / "c.csv").string());
    CHECK(r.exit_code == 0);
    CHECK(test::read_file(dir / "a.csv") != test::read_file(dir / "c.csv"));
  }

  SUBCASE("default output path derives from the source and engine") {
    const auto dir = test::fresh_dir("sppl_cli_defaultout");
    test::write_file(dir / "conjugate.sppl", test::kConjugate);
    const auto r = test::run_cli("sample " + (dir / "conjugate.sppl").string() +
                                 " --samples 20 --burnin 5 --seed 1");
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(dir / "conjugate_dhmc.csv"));
    CHECK(fs::exists(dir / "conjugate_dhmc.csv.manifest.json"));
    CHECK(r.out.find("conjugate_dhmc.csv") != std::string::npos);
  }

  SUBCASE("--samples 0 writes a header-only file") {
    const auto dir = test::fresh_dir("sppl_cli_zero");
    const auto out = dir / "empty.csv";
    const auto r = test::run_cli("sample " + model_path("conjugate.sppl") +
                                 " --samples 0 --burnin 5 --seed 1 -o " +
                                 out.string());
    CHECK(r.exit_code == 0);
    CHECK(r.out.rfind("wrote 0 samples", 0) == 0);
    CHECK(test::read_file(out) == "mu1\n");
    CHECK(manifest_next_to(out).at("num_samples") == 0);
  }

  SUBCASE("--mass broadcasts one value over every coordinate") {
    const auto dir = test::fresh_dir("sppl_cli_mass");
    const auto out = dir / "m.csv";
    const auto r = test::run_cli("sample " + model_path("gmm.sppl") +
                                 " --engine mwg --samples 20 --seed 1 --mass 2.5 -o " +
                                 out.string());
    CHECK(r.exit_code == 0);
    CHECK(manifest_next_to(out).at("mass") == json(std::vector<double>(12, 2.5)));
  }

  SUBCASE("rejected engine and format names") {
    const auto dir = test::fresh_dir("sppl_cli_badflag");
    const auto nuts = test::run_cli("sample " + model_path("gmm.sppl") +
                                    " --engine nuts -o " + (dir / "x.csv").string());
    CHECK(nuts.exit_code == 2);
    CHECK(nuts.err.find("nuts not in") != std::string::npos);

    const auto xml = test::run_cli("sample " + model_path("gmm.sppl") +
                                   " --format xml -o " + (dir / "x.csv").string());
    CHECK(xml.exit_code == 2);
  }

  SUBCASE("invalid sampler configuration exits 1") {
    const auto dir = test::fresh_dir("sppl_cli_badcfg");
    const auto r = test::run_cli("sample " + model_path("conjugate.sppl") +
                                 " --step-size 0 --samples 5 -o " +
                                 (dir / "x.csv").string());
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("step size must be positive") != std::string::npos);
  }
}

TEST_CASE("SPPL_SEED is read only when no --seed flag is given") {
  const auto dir = test::fresh_dir("sppl_cli_seed");
  const std::string base = "sample " + model_path("conjugate.sppl") +
                           " --samples 30 --burnin 5 -o ";

  SUBCASE("environment value is used and matches the equivalent flag") {
    const auto env_out = dir / "env.csv";
    const auto flag_out = dir / "flag.csv";
    CHECK(test::run_cli(base + env_out.string(), "SPPL_SEED=99").exit_code == 0);
    CHECK(test::run_cli(base + flag_out.string() + " --seed 99").exit_code == 0);
    CHECK(manifest_next_to(env_out).at("seed") == 99);
    CHECK(test::read_file(env_out) == test::read_file(flag_out));
  }

  SUBCASE("the flag beats the environment") {
    const auto out = dir / "beats.csv";
    const auto r = test::run_cli(base + out.string() + " --seed 5", "SPPL_SEED=99");
    CHECK(r.exit_code == 0);
    CHECK(manifest_next_to(out).at("seed") == 5);
  }

  SUBCASE("a malformed environment seed is a usage error") {
    const auto r = test::run_cli(base + (dir / "x.csv").string(), "SPPL_SEED=abc");
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("SPPL_SEED must be a nonnegative integer") !=
          std::string::npos);
  }

  SUBCASE("a malformed environment seed is ignored when the flag is present") {
    const auto out = dir / "ignored.csv";
    const auto r = test::run_cli(base + out.string() + " --seed 7", "SPPL_SEED=abc");
    CHECK(r.exit_code == 0);
    CHECK(manifest_next_to(out).at("seed") == 7);
  }

  SUBCASE("an empty environment seed falls through to the default") {
    const auto out = dir / "empty.csv";
    const auto r = test::run_cli(base + out.string(), "SPPL_SEED=");
    CHECK(r.exit_code == 0);
    CHECK(manifest_next_to(out).at("seed") == 0);
  }
}

TEST_CASE("sample --format jsonl carries per-step metadata") {
  const auto dir = test::fresh_dir("sppl_cli_jsonl");
  const auto out = dir / "latent.jsonl";
  const auto r = test::run_cli("sample " + model_path("program2_latent.sppl") +
                               " --samples 60 --burnin 20 --seed 4 --format jsonl -o " +
                               out.string());
  CHECK(r.exit_code == 0);

  const std::string source = test::read_file(model_path("program2_latent.sppl"));
  const auto [model, pd] = test::build(source);

  const auto rows = lines_of(test::read_file(out));
  REQUIRE(rows.size() == 60);
  std::set<std::string> flip_ids;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const json j = json::parse(rows[i]);
    CHECK(j.at("step") == i);
    REQUIRE(j.at("state").size() == 2);
    CHECK(j.at("accepted").is_boolean());
    CHECK(j.at("energy_error").is_number());
    for (const auto& f : j.at("flips")) flip_ids.insert(f.get<std::string>());
    // The recorded log density is the model's density at the recorded state.
    const std::vector<double> state = j.at("state").get<std::vector<double>>();
    CHECK(j.at("log_density").get<double>() ==
          doctest::Approx(pd.log_density(state)).epsilon(1e-12));
  }
  // Flips are rendered as predicate ids; this model has exactly one.
  for (const std::string& id : flip_ids) CHECK(id == "φ1");

  // The library reader synthesizes positional column names.
  const sppl::LoadedChain back = sppl::load_chain(out);
  CHECK(back.coords == std::vector<std::string>{"x1", "x2"});
  CHECK(back.num_rows == 60);
}

TEST_CASE("diagnose compares chains against the exact mixture posterior") {
  const auto dir = test::fresh_dir("sppl_cli_diag");
  const std::string gmm = model_path("gmm.sppl");
  const auto csv_chain = dir / "a.csv";
  const auto jsonl_chain = dir / "b.jsonl";
  REQUIRE(test::run_cli("sample " + gmm + " --engine mwg --samples 400 --burnin 100 --seed 1 -o " +
                        csv_chain.string())
              .exit_code == 0);
  REQUIRE(test::run_cli("sample " + gmm + " --engine mwg --samples 400 --burnin 100 --seed 2 --format jsonl -o " +
                        jsonl_chain.string())
              .exit_code == 0);

  SUBCASE("two chains, mixed formats: the JSONL columns map positionally") {
    const auto r = test::run_cli("diagnose " + csv_chain.string() + " " +
                                 jsonl_chain.string() + " --model " + gmm);
    CHECK(r.exit_code == 0);
    const auto rows = lines_of(r.out);
    REQUIRE(rows.size() >= 10);
    CHECK(rows[0] == "n,median_mse,q20_mse,q80_mse");
    std::size_t prev_n = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      std::istringstream row(rows[i]);
      std::string n_s, med_s, q20_s, q80_s;
      std::getline(row, n_s, ',');
      std::getline(row, med_s, ',');
      std::getline(row, q20_s, ',');
      std::getline(row, q80_s, ',');
      const std::size_t n = std::stoul(n_s);
      CHECK(n > prev_n);
      prev_n = n;
      const double med = std::stod(med_s);
      const double q20 = std::stod(q20_s);
      const double q80 = std::stod(q80_s);
      CHECK(q20 >= 0.0);
      CHECK(q20 <= med);
      CHECK(med <= q80);
    }
    const auto first = lines_of(r.out)[1];
    CHECK(first.rfind("10,", 0) == 0);
    CHECK(rows.back().rfind("400,", 0) == 0);
  }

  SUBCASE("a single chain degenerates to a zero-width band") {
    const auto r = test::run_cli("diagnose " + csv_chain.string() + " --model " +
                                 gmm + " --functional min_mean");
    CHECK(r.exit_code == 0);
    const auto rows = lines_of(r.out);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      std::istringstream row(rows[i]);
      std::string n_s, med_s, q20_s, q80_s;
      std::getline(row, n_s, ',');
      std::getline(row, med_s, ',');
      std::getline(row, q20_s, ',');
      std::getline(row, q80_s, ',');
      CHECK(med_s == q20_s);
      CHECK(med_s == q80_s);
    }
  }

  SUBCASE("--out writes the table to a file") {
    const auto table = dir / "bands.csv";
    const auto r = test::run_cli("diagnose " + csv_chain.string() + " --model " +
                                 gmm + " --functional predictive_mean -o " +
                                 table.string());
    CHECK(r.exit_code == 0);
    CHECK(r.out.empty());
    CHECK(test::read_file(table).rfind("n,median_mse", 0) == 0);
  }

  SUBCASE("models without an exact reference are refused") {
    const auto r = test::run_cli("diagnose " + csv_chain.string() + " --model " +
                                 model_path("conjugate.sppl"));
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("no exact reference is available") != std::string::npos);
  }

  SUBCASE("unknown functional names are usage errors") {
    const auto r = test::run_cli("diagnose " + csv_chain.string() + " --model " +
                                 gmm + " --functional mode");
    CHECK(r.exit_code == 2);
  }

  SUBCASE("chains shorter than the smallest grid point are refused") {
    const auto tiny = dir / "tiny.csv";
    test::write_file(tiny, "mu11,mu21\n0,0\n1,1\n2,2\n");
    const auto r = test::run_cli("diagnose " + tiny.string() + " --model " + gmm);
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("at least 10 samples") != std::string::npos);
  }

  SUBCASE("unsupported chain extensions are refused") {
    const auto bad = dir / "chain.tsv";
    test::write_file(bad, "mu11\n0\n");
    const auto r = test::run_cli("diagnose " + bad.string() + " --model " + gmm);
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("unsupported extension") != std::string::npos);
  }
}

TEST_CASE("the bundled mixture model matches the benchmark renderer") {
  // diagnose's exact reference is defined against this spec; the bundled
  // source must stay in lockstep with the renderer.
  CHECK(test::read_file(test::models_dir() / "gmm.sppl") ==
        sppl::render_gmm_source(sppl::GmmSpec::benchmark()));

  // And the bundled source really is the benchmark spec when recovered.
  const auto rec = sppl::match_gmm(
      test::compile_source(test::read_file(test::models_dir() / "gmm.sppl")));
  REQUIRE(rec.has_value());
  const sppl::GmmSpec want = sppl::GmmSpec::benchmark();
  CHECK(rec->spec.data == want.data);
  CHECK(rec->spec.p0 == want.p0);
  CHECK(rec->mean_coords == std::vector<std::string>{"mu11", "mu21"});
}
