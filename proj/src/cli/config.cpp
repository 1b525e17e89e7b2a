#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "cmv/cli.hpp"
#include "cmv/error.hpp"
#include "cmv/features.hpp"
#include "cmv/util.hpp"

namespace cmv::cli {

using nlohmann::json;

namespace {

template <class T>
void take(const json& j, const char* key, T& field) {
  if (!j.contains(key)) return;
  try {
    field = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidConfig, std::string("config key '") + key + "': " + e.what());
  }
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::UnreadableFile, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json optional_seed(const std::optional<std::uint64_t>& s) { return s ? json(*s) : json(); }

}  // namespace

RunConfig RunConfig::from_json(const json& j) {
  if (!j.is_object()) throw Error(Errc::InvalidConfig, "config must be a JSON object");
  static const std::set<std::string> known{
      "inputs", "input_format", "lexicons", "pos_sidecar", "out", "train_begin", "boundary", "heldout_end",
      "edit_pattern", "min_unique_challengers", "min_words", "min_negatives", "min_term_count", "task",
      "variant", "pair_feature_sets", "malleability_feature_sets", "lambdas", "penalties", "folds", "seed",
      "permutations", "bootstraps"};
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) throw Error(Errc::InvalidConfig, "unknown config key '" + k + "'");
  }
  RunConfig c;
  take(j, "inputs", c.inputs);
  take(j, "input_format", c.input_format);
  take(j, "lexicons", c.lexicons);
  take(j, "pos_sidecar", c.pos_sidecar);
  take(j, "out", c.out);
  take(j, "train_begin", c.train_begin);
  take(j, "boundary", c.boundary);
  take(j, "heldout_end", c.heldout_end);
  take(j, "edit_pattern", c.edit_pattern);
  take(j, "min_unique_challengers", c.min_unique_challengers);
  take(j, "min_words", c.min_words);
  take(j, "min_negatives", c.min_negatives);
  take(j, "min_term_count", c.min_term_count);
  take(j, "task", c.task);
  take(j, "variant", c.variant);
  take(j, "pair_feature_sets", c.pair_feature_sets);
  take(j, "malleability_feature_sets", c.malleability_feature_sets);
  take(j, "lambdas", c.lambdas);
  take(j, "penalties", c.penalties);
  take(j, "folds", c.folds);
  take(j, "permutations", c.permutations);
  take(j, "bootstraps", c.bootstraps);
  if (j.contains("seed") && !j.at("seed").is_null()) {
    std::uint64_t s = 0;
    take(j, "seed", s);
    c.seed = s;
  }
  return c;
}

json RunConfig::to_json() const {
  json j;
  j["inputs"] = inputs;
  j["input_format"] = input_format;
  j["lexicons"] = lexicons;
  j["pos_sidecar"] = pos_sidecar;
  j["out"] = out;
  j["train_begin"] = train_begin;
  j["boundary"] = boundary;
  j["heldout_end"] = heldout_end;
  j["edit_pattern"] = edit_pattern;
  j["min_unique_challengers"] = min_unique_challengers;
  j["min_words"] = min_words;
  j["min_negatives"] = min_negatives;
  j["min_term_count"] = min_term_count;
  j["task"] = task;
  j["variant"] = variant;
  j["pair_feature_sets"] = pair_feature_sets;
  j["malleability_feature_sets"] = malleability_feature_sets;
  j["lambdas"] = lambdas;
  j["penalties"] = penalties;
  j["folds"] = folds;
  j["seed"] = optional_seed(seed);
  j["permutations"] = permutations;
  j["bootstraps"] = bootstraps;
  return j;
}

void RunConfig::validate() const {
  if (input_format != "normalized" && input_format != "cmv_dump") {
    throw Error(Errc::InvalidConfig, "input_format must be 'normalized' or 'cmv_dump'");
  }
  if (!task.empty() && task != "pair" && task != "malleability") {
    throw Error(Errc::InvalidConfig, "task must be 'pair' or 'malleability'");
  }
  const auto b = parse_date_utc(train_begin), m = parse_date_utc(boundary), e = parse_date_utc(heldout_end);
  if (!(b < m && m <= e)) throw Error(Errc::InvalidConfig, "split dates must be increasing");
  if (lambdas.empty()) throw Error(Errc::InvalidConfig, "lambda grid is empty");
  for (const double l : lambdas) {
    if (!(l >= 0.0)) throw Error(Errc::InvalidConfig, "lambdas must be non-negative");
  }
  if (penalties.empty()) throw Error(Errc::InvalidConfig, "penalty list is empty");
  if (folds < 2) throw Error(Errc::InvalidConfig, "folds must be at least 2");
  for (const auto& s : pair_feature_sets) feature_set_prefixes(s, true);
  for (const auto& s : malleability_feature_sets) feature_set_prefixes(s, false);
}

std::uint64_t RunConfig::require_seed() const {
  if (!seed) throw Error(Errc::InvalidConfig, "a seed is required (--seed or config key \"seed\")");
  return *seed;
}

RunConfig load_config(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(slurp(path));
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidConfig, path.string() + ": " + e.what());
  }
  return RunConfig::from_json(j);
}

std::vector<std::string> feature_set_prefixes(std::string_view set, bool pair_task) {
  if (set == "n_words") return {"style.n_words"};
  if (set == "bow") return {"bow."};
  if (set == "pos") return {"pos."};
  if (set == "style") return {"style.", "quarters."};
  if (pair_task) {
    if (set == "entry_order") return {"order."};
    if (set == "interplay") return {"interplay."};
    if (set == "interplay_style") return {"interplay.", "style.", "quarters."};
    if (set == "all") return {"interplay.", "style.", "quarters.", "bow.", "pos."};
  } else if (set == "all") {
    return {"style.", "quarters.", "bow.", "pos."};
  }
  throw Error(Errc::InvalidConfig, "unknown feature set '" + std::string(set) + "'");
}

std::string stage_hash(std::string_view stage, const json& settings, std::string_view upstream) {
  std::string payload(stage);
  payload += '\n';
  payload += settings.dump();
  payload += '\n';
  payload += upstream;
  return hex64(fnv1a64(payload));
}

json ingest_settings(const RunConfig& cfg) {
  json inputs = json::array();
  for (const auto& p : cfg.inputs) inputs.push_back(hex64(fnv1a64(slurp(p))));
  return json{{"inputs", inputs}, {"input_format", cfg.input_format}, {"edit_pattern", cfg.edit_pattern}};
}

json dynamics_settings(const RunConfig& cfg) {
  return json{{"train_begin", cfg.train_begin}, {"boundary", cfg.boundary}, {"heldout_end", cfg.heldout_end}};
}

json pairs_settings(const RunConfig& cfg) {
  auto j = dynamics_settings(cfg);
  j["min_unique_challengers"] = cfg.min_unique_challengers;
  j["min_words"] = cfg.min_words;
  j["min_negatives"] = cfg.min_negatives;
  j["edit_pattern"] = cfg.edit_pattern;
  const auto stop = std::filesystem::path(cfg.lexicons) / "lexicons" / "stopwords.txt";
  j["stopwords"] = std::filesystem::exists(stop) ? hex64(fnv1a64(slurp(stop))) : "";
  return j;
}

json features_settings(const RunConfig& cfg) {
  json files = json::object();
  const std::filesystem::path dir(cfg.lexicons);
  if (std::filesystem::exists(dir)) {
    std::vector<std::filesystem::path> paths;
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
      if (e.is_regular_file()) paths.push_back(e.path());
    }
    std::sort(paths.begin(), paths.end());
    for (const auto& p : paths) {
      files[std::filesystem::relative(p, dir).generic_string()] = hex64(fnv1a64(slurp(p)));
    }
  }
  json j{{"resources", files}, {"min_term_count", cfg.min_term_count}, {"tokenizer", features::kTokenizerVersion}};
  j["pos_sidecar"] = cfg.pos_sidecar.empty() ? "" : hex64(fnv1a64(slurp(cfg.pos_sidecar)));
  return j;
}

json train_settings(const RunConfig& cfg) {
  return json{{"pair_feature_sets", cfg.pair_feature_sets},
              {"malleability_feature_sets", cfg.malleability_feature_sets},
              {"lambdas", cfg.lambdas},
              {"penalties", cfg.penalties},
              {"folds", cfg.folds},
              {"seed", optional_seed(cfg.seed)}};
}

json eval_settings(const RunConfig& cfg) {
  return json{{"permutations", cfg.permutations}, {"bootstraps", cfg.bootstraps}, {"seed", optional_seed(cfg.seed)}};
}

Workspace::Workspace(std::filesystem::path root) : root_(std::move(root)) {
  const auto m = root_ / "manifest.json";
  if (std::filesystem::exists(m)) {
    try {
      manifest_ = json::parse(slurp(m));
    } catch (const json::exception& e) {
      throw Error(Errc::MalformedRecord, "manifest.json: " + std::string(e.what()));
    }
  }
  if (!manifest_.is_object()) manifest_ = json::object();
  if (!manifest_.contains("stages")) manifest_["stages"] = json::object();
}

std::optional<std::string> Workspace::find_stage(std::string_view stage) const {
  const auto& s = manifest_.at("stages");
  const std::string key(stage);
  if (!s.contains(key)) return std::nullopt;
  return s.at(key).at("config_hash").get<std::string>();
}

std::string Workspace::stage_hash(std::string_view stage) const {
  auto h = find_stage(stage);
  if (!h) {
    throw Error(Errc::InvalidConfig,
                "no '" + std::string(stage) + "' artifacts in " + root_.string() + "; run that stage first");
  }
  return *h;
}

std::string Workspace::stage_upstream(std::string_view stage) const {
  stage_hash(stage);
  return manifest_.at("stages").at(std::string(stage)).at("upstream").get<std::string>();
}

void Workspace::record(std::string_view stage, const std::string& hash, const std::string& upstream,
                       const std::vector<std::string>& artifacts) {
  manifest_["stages"][std::string(stage)] =
      json{{"config_hash", hash}, {"upstream", upstream}, {"artifacts", artifacts}};
  save();
}

void Workspace::save() const {
  std::filesystem::create_directories(root_);
  std::ofstream out(root_ / "manifest.json", std::ios::binary);
  out << manifest_.dump(1) << '\n';
  if (!out) throw Error(Errc::UnreadableFile, "cannot write manifest.json");
}

namespace {

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

void Workspace::write(std::string_view rel, std::string_view body, const std::string& hash) const {
  const auto p = path(rel);
  std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (ends_with(rel, ".csv")) out << "# config_hash=" << hash << '\n';
  out << body;
  if (!out) throw Error(Errc::UnreadableFile, "cannot write " + p.string());
}

std::string Workspace::read_checked(std::string_view rel, const std::string& hash) const {
  const auto p = path(rel);
  if (!std::filesystem::exists(p)) throw Error(Errc::InvalidConfig, "missing artifact " + p.string());
  std::string body = slurp(p);
  std::string found;
  if (ends_with(rel, ".csv")) {
    const auto nl = body.find('\n');
    const std::string first = body.substr(0, nl);
    const std::string prefix = "# config_hash=";
    if (first.rfind(prefix, 0) == 0) found = first.substr(prefix.size());
    body = nl == std::string::npos ? std::string() : body.substr(nl + 1);
  } else {
    const auto first = ends_with(rel, ".jsonl") ? body.substr(0, body.find('\n')) : body;
    if (first.empty()) {
      // An empty line-delimited file has nowhere to carry a hash.
      found = hash;
    } else {
      try {
        const auto j = json::parse(first);
        if (j.contains("config_hash")) found = j.at("config_hash").get<std::string>();
      } catch (const json::exception& e) {
        throw Error(Errc::MalformedRecord, p.string() + ": " + e.what());
      }
    }
  }
  if (found != hash) {
    throw Error(Errc::StaleArtifact,
                p.string() + " was produced by config " + (found.empty() ? "?" : found) + ", expected " + hash);
  }
  return body;
}

}  // namespace cmv::cli
