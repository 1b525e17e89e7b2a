#include <doctest.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "checks.hpp"

namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& body) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << body;
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("cmv_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int cli(const std::string& args, const fs::path& log) {
  const std::string cmd = "\"" + checks::cli_path() + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int rc = std::system(cmd.c_str());
#ifdef WIFEXITED
  if (WIFEXITED(rc)) return WEXITSTATUS(rc);
#endif
  return rc;
}

fs::path write_config(const fs::path& dir, const fs::path& out, nlohmann::json extra = nlohmann::json::object()) {
  nlohmann::json j{{"inputs", {checks::fixture_path()}},
                   {"lexicons", checks::resources_path()},
                   {"out", out.string()},
                   {"seed", 7}};
  for (auto& [k, v] : extra.items()) j[k] = v;
  const auto p = dir / "config.json";
  spit(p, j.dump(2));
  return p;
}

std::string strip_hash(const std::string& csv) {
  if (csv.rfind("# config_hash=", 0) != 0) return csv;
  return csv.substr(csv.find('\n') + 1);
}

const std::vector<std::string> kDynamics{"fig4a.csv",  "fig4a_first_time.csv", "fig4b.csv", "fig5a.csv",
                                         "fig5b.csv",  "fig10a.csv",           "fig10b.csv"};

/// One full pipeline run shared by the cases below.
const fs::path& pipeline() {
  static const fs::path out = [] {
    const auto dir = scratch("main");
    const auto cfg = write_config(dir, dir / "ws");
    const auto start = std::chrono::steady_clock::now();
    const int rc = cli("run --config \"" + cfg.string() + "\"", dir / "run.log");
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    INFO(slurp(dir / "run.log"));
    REQUIRE(rc == 0);
    CHECK(secs < 30.0);
    return dir / "ws";
  }();
  return out;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("full run produces every artifact") {
    const auto& ws = pipeline();
    for (const char* f : {"corpus.jsonl", "awards.csv", "ingest_report.json", "pairs.jsonl", "malleability.csv",
                          "features/report.json", "models/index.json", "fig8.json", "fig9.json", "table2.csv",
                          "table3.csv", "table4.csv", "manifest.json"}) {
      INFO(f);
      CHECK(fs::exists(ws / f));
    }
    for (const auto& f : kDynamics) CHECK(slurp(ws / f).rfind("# config_hash=", 0) == 0);
  }

  TEST_CASE("dynamics tables reproduce the golden files") {
    const auto& ws = pipeline();
    for (const auto& f : kDynamics) {
      INFO(f);
      const auto golden = fs::path(checks::golden_dir()) / f;
      REQUIRE(fs::exists(golden));
      CHECK(strip_hash(slurp(ws / f)) == slurp(golden));
    }
  }

  TEST_CASE("a model compared with itself gives McNemar p = 1") {
    const auto fig = nlohmann::json::parse(slurp(pipeline() / "fig8.json"));
    std::size_t seen = 0;
    for (auto& [variant, sets] : fig.at("variants").items()) {
      INFO(variant);
      REQUIRE(sets.contains("n_words"));
      CHECK(sets["n_words"]["mcnemar_b"] == 0);
      CHECK(sets["n_words"]["mcnemar_c"] == 0);
      CHECK(sets["n_words"]["mcnemar_p"] == 1.0);
      ++seen;
    }
    CHECK(seen == 3);
  }

  TEST_CASE("equal configs give byte-identical outputs") {
    const auto& first = pipeline();
    const auto dir = scratch("rerun");
    // Same workspace path so the embedded config is identical too.
    const auto copy = dir / "copy";
    fs::copy(first, copy, fs::copy_options::recursive);
    const auto cfg = write_config(dir, first);
    REQUIRE(cli("run --config \"" + cfg.string() + "\"", dir / "run.log") == 0);
    std::size_t files = 0;
    for (const auto& e : fs::recursive_directory_iterator(copy)) {
      if (!e.is_regular_file()) continue;
      const auto rel = fs::relative(e.path(), copy);
      INFO(rel.string());
      CHECK(slurp(e.path()) == slurp(first / rel));
      ++files;
    }
    CHECK(files > 20);
  }

  TEST_CASE("changed configuration is refused downstream") {
    const auto dir = scratch("stale");
    fs::copy(pipeline(), dir / "ws", fs::copy_options::recursive);
    const auto cfg = write_config(dir, dir / "ws", {{"min_words", 40}});
    CHECK(cli("eval --config \"" + cfg.string() + "\"", dir / "eval.log") == 3);
    CHECK(cli("features --config \"" + cfg.string() + "\"", dir / "features.log") == 3);
  }

  TEST_CASE("validation failures exit with 2") {
    const auto dir = scratch("invalid");
    const auto no_seed = dir / "no_seed.json";
    spit(no_seed, nlohmann::json{{"inputs", {checks::fixture_path()}},
                                 {"lexicons", checks::resources_path()},
                                 {"out", (dir / "ws").string()}}
                      .dump());
    CHECK(cli("run --config \"" + no_seed.string() + "\"", dir / "a.log") == 2);
    const auto bad = dir / "bad.json";
    spit(bad, R"({"seed": 1, "no_such_key": true})");
    CHECK(cli("ingest --config \"" + bad.string() + "\"", dir / "b.log") == 2);
    CHECK(cli("run --variant sideways --seed 1", dir / "c.log") == 2);
    CHECK(cli("frobnicate", dir / "d.log") == 2);
  }

  TEST_CASE("ingest reports deleted-OP exclusions") {
    const auto dir = scratch("ingest");
    std::string body;
    for (int k = 0; k < 5; ++k) {
      nlohmann::json r{{"id", "p" + std::to_string(k)},
                       {"title", "CMV: view " + std::to_string(k)},
                       {"author", k == 2 ? "[deleted]" : "op" + std::to_string(k)},
                       {"body", "text"},
                       {"created_utc", 1400000000 + k},
                       {"comments",
                        {{{"id", "c" + std::to_string(k)},
                          {"author", "u"},
                          {"created_utc", 1400000100 + k},
                          {"body", "reply"},
                          {"parent_id", "p" + std::to_string(k)}}}}};
      body += r.dump() + "\n";
    }
    spit(dir / "dump.jsonl", body);
    const std::string args = "ingest --input \"" + (dir / "dump.jsonl").string() + "\" --out \"" +
                             (dir / "ws").string() + "\" --seed 1";
    REQUIRE(cli(args, dir / "ingest.log") == 0);
    const auto report = nlohmann::json::parse(slurp(dir / "ws" / "ingest_report.json"));
    CHECK(report["excluded"]["deleted_author"] == 1);
    CHECK(report["total"]["trees"] == 4);
    const auto corpus = slurp(dir / "ws" / "corpus.jsonl");
    CHECK(corpus.find("\"p2\"") == std::string::npos);

    const auto first = slurp(dir / "ws" / "ingest_report.json");
    REQUIRE(cli(args, dir / "ingest2.log") == 0);
    CHECK(slurp(dir / "ws" / "ingest_report.json") == first);
  }
}
