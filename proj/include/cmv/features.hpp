#pragma once

// Tokenization and feature extraction for arguments and original posts.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/SparseCore>

#include "cmv/lexicon.hpp"

namespace cmv::features {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) { return std::isnan(v); }

// ---------------------------------------------------------------------------
// Tokenizer
// ---------------------------------------------------------------------------

/// Bumped whenever tokenization output changes.
inline constexpr int kTokenizerVersion = 1;

struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  bool sentinel = false;
};

struct Tokens {
  /// Lowercased word tokens and sentinel tokens in text order.
  std::vector<std::string> tokens;
  std::vector<TokenSpan> spans;
  std::size_t sentences = 0;
  std::size_t paragraphs = 0;
};

bool is_sentinel(std::string_view token);

/// Word tokens: letters/digits with inner apostrophes; inner periods join
/// abbreviations and decimals ("e.g", "3.5"); hyphens split. Sentinels are
/// single tokens. Sentences are maximal segments between [.?!] runs and line
/// breaks that contain a word; paragraphs are blank-line separated blocks.
Tokens tokenize(std::string_view text);

/// Number of non-sentinel tokens.
std::size_t count_words(std::string_view text);

struct Truncation {
  std::string text;
  std::size_t words = 0;
  /// Number of URL sentinels kept in the prefix.
  std::size_t urls = 0;
  bool truncated = false;
};

/// Prefix of `text` ending right after its n-th word token.
Truncation truncate_words(std::string_view text, std::size_t n);

// ---------------------------------------------------------------------------
// Documents
// ---------------------------------------------------------------------------

/// Text of an argument or original post as seen by the extractors.
struct Document {
  /// Normalized text (edits removed, sentinels in place).
  std::string clean;
  /// Original Markdown.
  std::string raw;
  /// URLs in the order of the URL sentinels in `clean`.
  std::vector<std::string> links;
  /// Word-truncated text: sentence, paragraph and Markdown layout unavailable.
  bool truncated = false;
};

/// Document from a raw Markdown body, normalizing it with the default rules.
Document make_document(std::string_view raw);

struct Analyzed {
  const Document* doc = nullptr;
  std::vector<std::string> tokens;
  /// Tokens without sentinels.
  std::vector<std::string> words;
  /// Whether each entry of `words` is a stopword.
  std::vector<bool> stop;
  std::size_t sentences = 0;
  std::size_t paragraphs = 0;
  std::size_t quotes = 0;
  std::size_t question_marks = 0;
};

/// `doc` must outlive the result.
Analyzed analyze(const Document& doc, const lexicon::Lexicon& stopwords);

// ---------------------------------------------------------------------------
// Individual extractors
// ---------------------------------------------------------------------------

double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b);

enum class WordSet { All, Content, Stop };
inline constexpr std::array<WordSet, 3> kWordSets{WordSet::All, WordSet::Content, WordSet::Stop};
std::string_view word_set_name(WordSet s);

inline constexpr std::array<std::string_view, 4> kInterplayMetrics{"common", "reply_frac", "op_frac",
                                                                   "jaccard"};

/// 12 values ordered by word set (all, content, stop) then metric
/// (common, reply_frac, op_frac, jaccard). Fractions with a zero denominator
/// are missing.
using InterplayValues = std::array<double, 12>;
InterplayValues interplay(const Analyzed& arg, std::size_t arg_begin, std::size_t arg_end,
                          const Analyzed& op, std::size_t op_begin, std::size_t op_end);
InterplayValues interplay(const Analyzed& arg, const Analyzed& op);

/// Quarter boundaries over n items: first n mod 4 quarters get one extra.
std::array<std::pair<std::size_t, std::size_t>, 4> split_quarters(std::size_t n);

struct LinkKinds {
  bool com = false;
  bool edu = false;
  bool pdf = false;
};
LinkKinds classify_link(std::string_view url);

struct MarkdownCounts {
  std::size_t italics = 0;
  std::size_t bolds = 0;
  bool bullet_list = false;
  bool numbered_list = false;
};
/// Counts emphasis spans and list markers in raw Markdown, ignoring
/// blockquote lines and URL text.
MarkdownCounts markdown_counts(std::string_view raw);

std::size_t count_syllables(std::string_view word);
double word_entropy(std::span<const std::string> words);
double flesch_kincaid(std::size_t words, std::size_t sentences, std::size_t syllables);

// ---------------------------------------------------------------------------
// Named dense features
// ---------------------------------------------------------------------------

enum class Family { Interplay, Style, Quarters, Bow, Pos };
Family parse_family(std::string_view name);
std::string_view family_name(Family f);

/// Column names of the dense families for an argument; `truncated` drops
/// columns that cannot be computed on word-truncated text.
std::vector<std::string> interplay_columns();
std::vector<std::string> style_columns(bool truncated);
std::vector<std::string> quarter_columns();

/// Values aligned with the matching *_columns().
std::vector<double> interplay_features(const Analyzed& arg, const Analyzed& op);
std::vector<double> style_features(const Analyzed& arg, const lexicon::ResourceSet& res);
std::vector<double> quarter_features(const Analyzed& arg, const lexicon::ResourceSet& res);

/// Interplay metric for every (argument subdivision, OP subdivision) cell;
/// index 4 stands for the full text. Empty subdivisions give missing values.
using QuarterMatrix = std::array<std::array<InterplayValues, 5>, 5>;
QuarterMatrix quarter_interplay(const Analyzed& arg, const Analyzed& op);

/// Mean norm score of content words, indexed [dimension][quarter].
std::array<std::array<double, 4>, 4> quarter_scores(const Analyzed& arg, const lexicon::ResourceSet& res);

// ---------------------------------------------------------------------------
// Sparse vectors
// ---------------------------------------------------------------------------

struct SparseVector {
  std::vector<std::pair<std::uint32_t, double>> entries;

  double norm() const;
};

class Vocabulary {
 public:
  Vocabulary() = default;
  /// Terms with total count strictly greater than `min_count`, sorted.
  static Vocabulary build(const std::vector<std::vector<std::string>>& docs, std::size_t min_count = 5);
  explicit Vocabulary(std::vector<std::string> terms);

  std::optional<std::uint32_t> index(std::string_view term) const;
  const std::vector<std::string>& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }

 private:
  std::vector<std::string> terms_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

/// Term-frequency vector over in-vocabulary terms, L2 normalized.
SparseVector tf_vector(std::span<const std::string> terms, const Vocabulary& vocab);

// ---------------------------------------------------------------------------
// Part-of-speech tags
// ---------------------------------------------------------------------------

class PosTagger {
 public:
  virtual ~PosTagger() = default;
  /// One coarse tag per word. `node_ids` names the source comments, which
  /// lets pre-tagged sidecars look the text up.
  virtual std::vector<std::string> tag(std::span<const std::string> words,
                                       std::span<const std::string> node_ids) const = 0;
  virtual std::string name() const = 0;
};

/// Lexicon lookup with suffix fallbacks. Lexicon file: "word<TAB>TAG" per line.
class LexicalTagger : public PosTagger {
 public:
  explicit LexicalTagger(std::unordered_map<std::string, std::string> lexicon);
  static LexicalTagger load(const std::string& path);

  std::vector<std::string> tag(std::span<const std::string> words,
                               std::span<const std::string> node_ids) const override;
  std::string name() const override { return "lexical"; }
  std::string tag_word(std::string_view word) const;

 private:
  std::unordered_map<std::string, std::string> lexicon_;
};

/// Pre-tagged comments: "node_id<TAB>TAG TAG ..." per line. Tags of the
/// listed nodes are concatenated and cut to the number of words.
class SidecarTagger : public PosTagger {
 public:
  explicit SidecarTagger(std::unordered_map<std::string, std::vector<std::string>> tags);
  static SidecarTagger load(const std::string& path);

  std::vector<std::string> tag(std::span<const std::string> words,
                               std::span<const std::string> node_ids) const override;
  std::string name() const override { return "sidecar"; }

 private:
  std::unordered_map<std::string, std::vector<std::string>> tags_;
};

// ---------------------------------------------------------------------------
// Matrices
// ---------------------------------------------------------------------------

using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Named columns; missing values are stored as explicit NaN entries, absent
/// entries are zero.
struct FeatureMatrix {
  std::vector<std::string> names;
  std::vector<std::string> row_ids;
  SparseRows values;

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t cols() const { return names.size(); }
  std::optional<std::size_t> column(std::string_view name) const;
  /// Dense copy of one column.
  std::vector<double> column_values(std::size_t j) const;
  /// Columns whose name starts with any of the prefixes, in registry order.
  FeatureMatrix select_prefixes(std::span<const std::string> prefixes) const;
  FeatureMatrix select_rows(std::span<const std::size_t> rows) const;
};

/// Incrementally assembles rows of (column, value) pairs.
class MatrixBuilder {
 public:
  explicit MatrixBuilder(std::vector<std::string> names);
  /// `values` is aligned with a contiguous column block starting at `offset`.
  void add_dense(std::size_t row, std::size_t offset, std::span<const double> values);
  void add_sparse(std::size_t row, std::size_t offset, const SparseVector& v, double scale = 1.0);
  FeatureMatrix finish(std::vector<std::string> row_ids);

 private:
  std::vector<std::string> names_;
  std::vector<Eigen::Triplet<double>> triplets_;
  std::size_t max_row_ = 0;
  bool any_ = false;
};

std::string matrix_to_csv(const FeatureMatrix& m, std::string_view id_column = "id");
FeatureMatrix matrix_from_csv(std::string_view csv);

/// Extraction settings shared by the pair and malleability tasks.
struct ExtractionConfig {
  std::vector<Family> families{Family::Interplay, Family::Style, Family::Quarters, Family::Bow,
                               Family::Pos};
  std::size_t min_term_count = 5;
};

/// Columns and per-document values for one document (with or without an OP
/// counterpart) under a fixed column layout.
class Extractor {
 public:
  Extractor(const lexicon::ResourceSet& res, const ExtractionConfig& config, bool truncated,
            bool with_interplay, Vocabulary bow_vocab, Vocabulary pos_vocab, const PosTagger* tagger);

  const std::vector<std::string>& columns() const { return columns_; }
  /// Adds the document's features into row `row` of `builder`, multiplied by `sign`.
  void extract(MatrixBuilder& builder, std::size_t row, const Analyzed& doc, const Analyzed* op,
               std::span<const std::string> node_ids, double sign = 1.0) const;
  /// Dense values (NaN for missing) for the non-sparse families, aligned with
  /// the first dense_count() columns.
  std::vector<double> dense_values(const Analyzed& doc, const Analyzed* op) const;
  std::size_t dense_count() const { return dense_count_; }

  const Vocabulary& bow_vocab() const { return bow_; }
  const Vocabulary& pos_vocab() const { return pos_; }

 private:
  const lexicon::ResourceSet& res_;
  ExtractionConfig config_;
  bool truncated_;
  bool with_interplay_;
  Vocabulary bow_;
  Vocabulary pos_;
  const PosTagger* tagger_;
  std::vector<std::string> columns_;
  std::size_t dense_count_ = 0;
};

}  // namespace cmv::features
