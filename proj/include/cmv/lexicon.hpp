#pragma once

// Word lists, word norms and embedding-based norm extrapolation.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cmv::lexicon {

/// Single words plus multiword cues, all lowercase.
class Lexicon {
 public:
  Lexicon() = default;
  Lexicon(std::string name, std::span<const std::string> entries);

  const std::string& name() const { return name_; }
  bool contains(std::string_view word) const { return words_.count(std::string(word)) > 0; }
  const std::set<std::string>& words() const { return words_; }
  const std::set<std::vector<std::string>>& phrases() const { return phrases_; }
  std::size_t size() const { return words_.size() + phrases_.size(); }
  bool empty() const { return size() == 0; }

  /// Number of positions where an entry starts; a multiword cue matches as a
  /// contiguous token subsequence.
  std::size_t count_matches(std::span<const std::string> tokens) const;

 private:
  std::string name_;
  std::set<std::string> words_;
  std::set<std::vector<std::string>> phrases_;
  std::size_t max_phrase_ = 0;
};

/// One entry per line; "#" starts a comment. Throws UnreadableFile / EmptyLexicon.
Lexicon load_lexicon(const std::filesystem::path& path, std::string name);
Lexicon parse_lexicon(std::string_view text, std::string name);

// ---------------------------------------------------------------------------
// Norms
// ---------------------------------------------------------------------------

enum class Dimension { Arousal, Concreteness, Dominance, Valence };
inline constexpr std::array<Dimension, 4> kDimensions{Dimension::Arousal, Dimension::Concreteness,
                                                      Dimension::Dominance, Dimension::Valence};
std::string_view dimension_name(Dimension d);

struct ScaleBounds {
  double min = 1.0;
  double max = 9.0;
};
/// Rating scales of the public norm datasets: 1-5 for concreteness, 1-9 otherwise.
ScaleBounds default_bounds(Dimension d);

enum class Provenance { Native, Extrapolated };

class NormTable {
 public:
  explicit NormTable(Dimension d = Dimension::Arousal) : dim_(d) {}

  Dimension dimension() const { return dim_; }
  std::optional<double> score(std::string_view word) const;
  std::optional<Provenance> provenance(std::string_view word) const;
  std::size_t size() const { return scores_.size(); }
  std::size_t native_count() const;
  /// Extrapolated predictions that had to be clamped into [0, 1].
  std::size_t clamped() const { return clamped_; }

  /// Scores must already be in [0, 1].
  void set_native(const std::string& word, double score);
  /// Clamps into [0, 1]; never overrides an existing entry.
  void set_extrapolated(const std::string& word, double score);

  /// Words in lexicographic order.
  std::vector<std::string> words() const;

 private:
  Dimension dim_;
  std::unordered_map<std::string, double> scores_;
  std::unordered_map<std::string, Provenance> prov_;
  std::size_t clamped_ = 0;
};

/// CSV "word,score" with an optional header row. A first line of the form
/// "# scale MIN MAX" overrides `bounds`. Duplicate words are averaged.
/// Throws ScoreOutOfDeclaredRange for scores outside the declared scale.
NormTable load_norms(const std::filesystem::path& path, Dimension d,
                     std::optional<ScaleBounds> bounds = std::nullopt);
NormTable parse_norms(std::string_view text, Dimension d, std::optional<ScaleBounds> bounds = std::nullopt);

struct EmbeddingTable {
  std::size_t dim = 0;
  std::unordered_map<std::string, std::vector<double>> vectors;

  const std::vector<double>* find(std::string_view word) const;
};

/// Plain text "word v1 ... vd"; a leading "count dim" header line is skipped.
EmbeddingTable load_embeddings(const std::filesystem::path& path);
EmbeddingTable parse_embeddings(std::string_view text);

struct RidgeModel {
  std::vector<double> weights;
  double intercept = 0.0;
  double lambda = 0.0;

  double predict(std::span<const double> x) const;
};

/// Closed-form ridge on centered data; the intercept is unpenalized.
RidgeModel fit_ridge(const std::vector<std::vector<double>>& x, std::span<const double> y, double lambda);

struct ExtrapolationOptions {
  std::vector<double> lambda_grid{0.1, 1.0, 10.0, 100.0};
  std::size_t folds = 5;
  std::size_t min_overlap = 1000;
  std::uint64_t seed = 17;
};

/// Ridge regressor from embeddings to native scores, lambda chosen by k-fold
/// CV mean squared error (ties go to the larger lambda). Throws
/// InsufficientOverlap when fewer than `min_overlap` native words have vectors.
RidgeModel fit_norm_regressor(const NormTable& norms, const EmbeddingTable& emb,
                              const ExtrapolationOptions& options = {});

struct ExtrapolationResult {
  NormTable table;
  bool enabled = false;
  std::size_t added = 0;
  double lambda = 0.0;
  std::string diagnostic;
};

/// Adds predictions for vocabulary words lacking a native score but having an
/// embedding. Native entries are never modified. On insufficient overlap the
/// input table is returned unchanged with `enabled == false`.
ExtrapolationResult extrapolate_norms(const NormTable& norms, const EmbeddingTable& emb,
                                      std::span<const std::string> vocab,
                                      const ExtrapolationOptions& options = {});

// ---------------------------------------------------------------------------
// Resource directory
// ---------------------------------------------------------------------------

/// lexicons/{stopwords,positive,negative,hedges}.txt, norms/<dimension>.csv and
/// an optional embeddings.txt. Missing norm files leave that dimension empty.
struct ResourceSet {
  Lexicon stopwords;
  Lexicon positive;
  Lexicon negative;
  Lexicon hedges;
  std::array<std::optional<NormTable>, 4> norms;
  std::optional<EmbeddingTable> embeddings;
  std::vector<std::string> diagnostics;

  const NormTable* norm(Dimension d) const {
    const auto& n = norms[static_cast<std::size_t>(d)];
    return n ? &*n : nullptr;
  }
  /// Hash over every loaded resource, for artifact provenance.
  std::uint64_t fingerprint() const;
};

ResourceSet load_resources(const std::filesystem::path& dir);

/// Runs extrapolate_norms for every loaded dimension when embeddings exist.
void extrapolate_resources(ResourceSet& res, std::span<const std::string> vocab,
                           const ExtrapolationOptions& options = {});

}  // namespace cmv::lexicon
