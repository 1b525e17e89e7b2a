#pragma once

// Standardization, logistic regression with grouped cross-validation,
// evaluation metrics and significance tests.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace cmv::models {

using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// ---------------------------------------------------------------------------
// Standardizer
// ---------------------------------------------------------------------------

/// Per-column mean / population standard deviation over non-missing training
/// values. Missing cells are imputed with the training mean (or 0 when not
/// centering); constant columns map to 0; all-missing columns are dropped.
struct Standardizer {
  bool center = true;
  std::vector<double> mean;
  std::vector<double> sd;
  std::vector<bool> dropped;

  static Standardizer fit(const SparseRows& x, bool center = true);

  std::size_t cols() const { return mean.size(); }
  /// 1/sd, or 0 for constant and dropped columns.
  double inv_scale(std::size_t j) const;
  /// Copy of `x` with NaN cells replaced by the imputation value.
  SparseRows impute(const SparseRows& x) const;
  /// Fully materialized standardized matrix (tests and small inputs).
  Eigen::MatrixXd transform_dense(const SparseRows& x) const;
  std::vector<std::size_t> dropped_columns() const;
};

/// Standardized view Z = (X - mean) * diag(inv_scale) of an imputed matrix,
/// evaluated without densifying X.
class Design {
 public:
  Design(const SparseRows& imputed, const Standardizer& s);

  Eigen::Index rows() const { return x_.rows(); }
  Eigen::Index cols() const { return x_.cols(); }
  Eigen::VectorXd times(const Eigen::VectorXd& w) const;
  Eigen::VectorXd transpose_times(const Eigen::VectorXd& r) const;

 private:
  const SparseRows& x_;
  Eigen::VectorXd mean_;
  Eigen::VectorXd inv_;
};

// ---------------------------------------------------------------------------
// Logistic regression
// ---------------------------------------------------------------------------

enum class Penalty { L1, L2 };
std::string_view penalty_name(Penalty p);
Penalty parse_penalty(std::string_view name);

/// Weighted mean logistic loss over labels y in {0, 1}.
class LogisticObjective {
 public:
  LogisticObjective(const Design& x, std::span<const int> y, std::span<const double> sample_weight);

  double loss(const Eigen::VectorXd& w, double b) const;
  /// Gradient of loss() with respect to w and b.
  void gradient(const Eigen::VectorXd& w, double b, Eigen::VectorXd& gw, double& gb) const;

 private:
  const Design& x_;
  Eigen::VectorXd y_;
  Eigen::VectorXd c_;
  double total_ = 0.0;
};

struct TrainOptions {
  Penalty penalty = Penalty::L1;
  double lambda = 0.01;
  bool fit_intercept = true;
  /// Class weights n / (2 n_c); otherwise all weights are 1.
  bool balanced = false;
  /// Center columns before scaling (false for antisymmetric pair rows).
  bool center = true;
  double tol = 1e-7;
  std::size_t max_iter = 10000;
};

struct LogRegModel {
  std::vector<std::string> names;
  /// Weights in standardized space, aligned with `names`.
  Eigen::VectorXd weights;
  double intercept = 0.0;
  Penalty penalty = Penalty::L1;
  double lambda = 0.0;
  bool fit_intercept = true;
  std::array<double, 2> class_weights{1.0, 1.0};
  Standardizer standardizer;
  bool converged = false;
  std::size_t iterations = 0;

  /// Linear scores for raw (unimputed, unstandardized) rows.
  Eigen::VectorXd decision(const SparseRows& x) const;
  std::size_t nonzero() const;
};

std::array<double, 2> balanced_class_weights(std::span<const int> y);

/// Proximal gradient (FISTA with backtracking and adaptive restart) on the
/// standardized training matrix.
LogRegModel fit_logreg(const SparseRows& x, std::span<const int> y, std::vector<std::string> names,
                       const TrainOptions& options);

/// Objective value (loss + penalty) for a fitted model on its training data.
double objective(const LogRegModel& m, const SparseRows& x, std::span<const int> y);

// ---------------------------------------------------------------------------
// Cross-validation
// ---------------------------------------------------------------------------

/// Every row sharing a group lands in one fold. Groups are shuffled with
/// `seed` and assigned greedily to the fold with the fewest rows.
std::vector<std::size_t> group_folds(std::span<const std::string> groups, std::size_t k, std::uint64_t seed);

inline const std::vector<double> kDefaultLambdas{1e-4, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1};

struct CvPoint {
  Penalty penalty = Penalty::L1;
  double lambda = 0.0;
  double score = 0.0;
};

struct PairTrainConfig {
  std::vector<double> lambdas = kDefaultLambdas;
  std::size_t folds = 5;
  std::uint64_t seed = 1;
  double tol = 1e-7;
  std::size_t max_iter = 10000;
};

struct PairModel {
  LogRegModel model;
  std::vector<CvPoint> cv;
};

/// Rows are positive-minus-negative differences; each pair is trained in
/// both orderings without an intercept. Lambda maximizes mean CV symmetric
/// pairwise accuracy, ties going to the larger lambda.
PairModel train_pair_model(const SparseRows& diffs, std::span<const std::string> groups,
                           std::vector<std::string> names, const PairTrainConfig& cfg);

/// Fits one lambda on pair differences (both orderings, no intercept).
LogRegModel fit_pair_logreg(const SparseRows& diffs, std::vector<std::string> names, double lambda,
                            const PairTrainConfig& cfg);

enum class PairOutcome { PositiveWins, NegativeWins };
/// Sign of the score; exact ties go to NegativeWins.
PairOutcome pair_predict(double score);
/// 1 for a positive score, 1/2 for a tie, 0 otherwise, averaged.
double symmetric_accuracy(std::span<const double> scores);

struct WeightedTrainConfig {
  std::vector<double> lambdas = kDefaultLambdas;
  std::vector<Penalty> penalties{Penalty::L1, Penalty::L2};
  std::size_t folds = 5;
  std::uint64_t seed = 1;
  double tol = 1e-7;
  std::size_t max_iter = 10000;
};

struct WeightedModel {
  LogRegModel model;
  std::vector<CvPoint> cv;
};

/// Class-weighted logistic regression; penalty and lambda maximize mean CV AUC.
WeightedModel train_weighted_model(const SparseRows& x, std::span<const int> y,
                                   std::span<const std::string> groups, std::vector<std::string> names,
                                   const WeightedTrainConfig& cfg);

// ---------------------------------------------------------------------------
// Metrics and tests
// ---------------------------------------------------------------------------

/// Mann-Whitney AUC, ties count 1/2. Throws DegenerateLabels.
double auc(std::span<const double> scores, std::span<const int> labels);

/// Two-sided: exact binomial on discordant counts when b + c <= 25, else
/// chi-square with continuity correction. b = c = 0 gives 1.
double mcnemar(std::size_t b, std::size_t c);
double mcnemar(const std::vector<bool>& correct_a, const std::vector<bool>& correct_b);

using Metric = std::function<double(std::span<const double> scores, std::span<const int> labels)>;

struct PermutationResult {
  double observed = 0.0;
  double p = 1.0;
};

/// One-sided paired permutation test of metric(a) - metric(b): each resample
/// swaps the two systems' scores on a random subset of items.
/// p = (#{resampled diff >= observed} + 1) / (n_resamples + 1).
PermutationResult permutation_test(std::span<const double> a, std::span<const double> b,
                                   std::span<const int> labels, const Metric& metric, std::size_t n_resamples,
                                   std::uint64_t seed);

struct BootstrapResult {
  double observed = 0.0;
  double p = 1.0;
  std::size_t valid = 0;
};

/// Item-level bootstrap of the AUC; p = fraction of resamples with AUC <= null.
/// Resamples lacking either class are skipped.
BootstrapResult bootstrap_auc_test(std::span<const double> scores, std::span<const int> labels,
                                   std::size_t n_resamples, std::uint64_t seed, double null_auc = 0.5);

struct TTest {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
  double mean_diff = 0.0;
  std::size_t n = 0;
};

/// Two-sided paired t-test on differences. All-zero differences give p = 1;
/// constant nonzero differences give p = 0.
TTest paired_t_test(std::span<const double> diffs);
/// Two-sided Welch test of mean(a) - mean(b).
TTest welch_t_test(std::span<const double> a, std::span<const double> b);

/// Two-sided Student-t tail probability.
double student_t_two_sided(double t, double df);

struct SignificanceRow {
  std::string feature;
  int direction = 0;
  int level = 0;
  bool tested = false;
  double p = 1.0;
  double p_corrected = 1.0;
  TTest test;
  /// "none", "T", "T_reversed" or "unavailable".
  std::string truncated = "none";
};

/// Level from a Bonferroni-corrected p: 4 below 1e-4, 3 below 1e-3, 2 below
/// 1e-2, 1 below 0.05, else 0.
int arrow_level(double p_corrected);

/// Paired tests over per-pair member values (NaN = missing). A feature is
/// tested when it has at least two complete pairs and not all differences
/// are zero; the Bonferroni divisor is the number of tested features.
std::vector<SignificanceRow> paired_significance(std::span<const std::string> names,
                                                 const Eigen::MatrixXd& positive, const Eigen::MatrixXd& negative);

/// Welch tests between the rows labeled 1 and 0, Bonferroni over tested features.
std::vector<SignificanceRow> unpaired_significance(std::span<const std::string> names, const Eigen::MatrixXd& x,
                                                   std::span<const int> labels);

/// Marks each significant row of `main` with its status in `truncated`.
void annotate_truncated(std::vector<SignificanceRow>& main, const std::vector<SignificanceRow>& truncated);

std::string significance_csv(std::span<const SignificanceRow> rows, bool with_truncated);

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

std::string model_to_json(const LogRegModel& m, std::string_view config_hash, std::string_view extra_json = "{}");
LogRegModel model_from_json(std::string_view text);

}  // namespace cmv::models
