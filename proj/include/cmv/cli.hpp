#pragma once

// Pipeline commands over a workspace directory. Every artifact carries the
// hash of the configuration that produced it, and each command checks the
// hashes of the artifacts it consumes.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace cmv::cli {

enum ExitCode : int { kOk = 0, kInternal = 1, kValidation = 2, kStale = 3 };

struct RunConfig {
  std::vector<std::string> inputs;
  /// "normalized" or "cmv_dump".
  std::string input_format = "normalized";
  std::string lexicons = "resources";
  /// Pre-tagged comments ("node_id<TAB>TAG ..."); empty uses <lexicons>/pos/lexicon.tsv.
  std::string pos_sidecar;
  std::string out = "workspace";

  std::string train_begin = "2013-01-01";
  std::string boundary = "2015-05-08";
  std::string heldout_end = "2015-09-02";
  std::string edit_pattern;

  std::size_t min_unique_challengers = 10;
  std::size_t min_words = 50;
  std::size_t min_negatives = 3;
  std::size_t min_term_count = 5;

  /// Restricts train/eval to one task or variant; empty means all.
  std::string task;
  std::string variant;
  std::vector<std::string> pair_feature_sets{"n_words", "entry_order", "bow", "pos", "interplay",
                                             "style", "interplay_style", "all"};
  std::vector<std::string> malleability_feature_sets{"n_words", "bow", "pos", "style", "all"};
  std::vector<double> lambdas{1e-4, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1};
  std::vector<std::string> penalties{"l1", "l2"};
  std::size_t folds = 5;
  std::optional<std::uint64_t> seed;
  std::size_t permutations = 10000;
  std::size_t bootstraps = 10000;

  /// Throws Error(InvalidConfig) on unknown keys or bad values.
  static RunConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;
  std::uint64_t require_seed() const;
};

RunConfig load_config(const std::filesystem::path& path);

/// Feature-name prefixes selected by a named feature set.
std::vector<std::string> feature_set_prefixes(std::string_view set, bool pair_task);

/// Manifest of stage hashes stored at <out>/manifest.json.
class Workspace {
 public:
  explicit Workspace(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path path(std::string_view rel) const { return root_ / std::string(rel); }

  /// Recorded hash of a stage; throws Error(InvalidConfig) when the stage never ran.
  std::string stage_hash(std::string_view stage) const;
  std::optional<std::string> find_stage(std::string_view stage) const;
  /// Upstream hash the stage was computed from ("" for the first stage).
  std::string stage_upstream(std::string_view stage) const;
  void record(std::string_view stage, const std::string& hash, const std::string& upstream,
              const std::vector<std::string>& artifacts);

  /// Writes a text artifact; CSV files get a leading "# config_hash=" line.
  void write(std::string_view rel, std::string_view body, const std::string& hash) const;
  /// Reads an artifact and checks its embedded hash; throws Error(StaleArtifact).
  std::string read_checked(std::string_view rel, const std::string& hash) const;

 private:
  void save() const;

  std::filesystem::path root_;
  nlohmann::json manifest_;
};

/// Hash of a stage from its own settings and its upstream stage hash.
std::string stage_hash(std::string_view stage, const nlohmann::json& settings, std::string_view upstream);

/// Stage settings that enter the hash chain.
nlohmann::json ingest_settings(const RunConfig& cfg);
nlohmann::json dynamics_settings(const RunConfig& cfg);
nlohmann::json pairs_settings(const RunConfig& cfg);
nlohmann::json features_settings(const RunConfig& cfg);
nlohmann::json train_settings(const RunConfig& cfg);
nlohmann::json eval_settings(const RunConfig& cfg);

void cmd_ingest(const RunConfig& cfg);
void cmd_dynamics(const RunConfig& cfg);
void cmd_pairs(const RunConfig& cfg);
void cmd_features(const RunConfig& cfg);
void cmd_train(const RunConfig& cfg);
void cmd_eval(const RunConfig& cfg);
void cmd_significance(const RunConfig& cfg);
void cmd_run(const RunConfig& cfg);

/// Runs a command and maps errors to exit codes, printing them to stderr.
int guarded(const std::string& name, void (*cmd)(const RunConfig&), const RunConfig& cfg);

}  // namespace cmv::cli
