#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "loomline/json_util.hpp"

namespace loomline::metrics {

/// Bad metric input: mismatched lengths, labels out of range, malformed
/// score vectors, or a ROC request for a class lacking positives/negatives.
class MetricError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// k x k counts; rows are true classes, columns predictions.
class ConfusionCounts {
 public:
  explicit ConfusionCounts(std::size_t k = 5);

  void add(std::size_t truth, std::size_t predicted);

  std::size_t classes() const { return k_; }
  std::uint64_t cell(std::size_t truth, std::size_t predicted) const;
  std::uint64_t total() const { return total_; }
  std::uint64_t trace() const;

  // One-vs-rest counts for class c.
  std::uint64_t tp(std::size_t c) const;
  std::uint64_t fp(std::size_t c) const;
  std::uint64_t fn(std::size_t c) const;
  std::uint64_t tn(std::size_t c) const;

  bool operator==(const ConfusionCounts&) const = default;

 private:
  std::size_t k_;
  std::uint64_t total_ = 0;
  std::vector<std::uint64_t> cells_;
};

/// Throws MetricError naming the first offending index.
ConfusionCounts confusion_matrix(std::span<const int> truth, std::span<const int> predicted,
                                 std::size_t k = 5);

// Undefined (zero denominator) values are std::nullopt.
std::optional<double> precision(const ConfusionCounts& counts, std::size_t c);
std::optional<double> recall(const ConfusionCounts& counts, std::size_t c);
/// 2PR/(P+R); undefined when P or R is, and 0 when both are 0.
std::optional<double> f1(const ConfusionCounts& counts, std::size_t c);
/// trace / total.
std::optional<double> accuracy(const ConfusionCounts& counts);

/// Unweighted mean over the defined entries, with the number left out.
struct MacroAverage {
  std::optional<double> value;
  std::size_t excluded = 0;
};

MacroAverage macro_average(std::span<const std::optional<double>> values);

/// Per-sample class scores; every row has k entries.
using ScoreMatrix = std::vector<std::vector<double>>;

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  bool operator==(const RocPoint&) const = default;
};

/// One-vs-rest ROC staircase for class c from (0,0) to (1,1). Tied scores
/// form a single diagonal step. Throws MetricError when the class has no
/// positives or no negatives.
std::vector<RocPoint> roc_curve(const ScoreMatrix& scores, std::span<const int> truth,
                                std::size_t c);

/// Trapezoidal area under a piecewise-linear curve.
double trapezoid_area(std::span<const RocPoint> curve);

struct AucResult {
  std::vector<std::optional<double>> per_class;
  MacroAverage macro;
};

/// Per-class AUC as the trapezoid under roc_curve; classes without both
/// positives and negatives are undefined and left out of the macro mean.
AucResult roc_auc(const ScoreMatrix& scores, std::span<const int> truth, std::size_t k = 5);

struct MetricSet {
  ConfusionCounts confusion{5};
  std::optional<double> accuracy;
  std::vector<std::optional<double>> precision;
  std::vector<std::optional<double>> recall;
  std::vector<std::optional<double>> f1;
  MacroAverage macro_precision;
  MacroAverage macro_recall;
  MacroAverage macro_f1;
  // Single-label micro averages all collapse to accuracy.
  std::optional<double> micro_precision;
  std::optional<double> micro_recall;
  std::optional<double> micro_f1;
  std::vector<std::optional<double>> auc;
  MacroAverage macro_auc;
};

/// All metrics at once. `scores` may be empty, leaving AUCs undefined.
MetricSet evaluate(std::span<const int> truth, std::span<const int> predicted,
                   const ScoreMatrix& scores, std::size_t k = 5);

Json metric_set_to_json(const MetricSet& metrics);

/// Rows of a predictions file.
struct Predictions {
  std::vector<int> truth;
  std::vector<int> predicted;
  ScoreMatrix scores;
};

/// Malformed predictions CSV; line() is 1-based.
class CsvError : public std::runtime_error {
 public:
  CsvError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

inline constexpr const char* kPredictionsHeader =
    "true_label,predicted_label,score_0,score_1,score_2,score_3,score_4";

/// Parses the five-class predictions format. Score rows must lie in [0,1]
/// and sum to 1 within 1e-6.
Predictions parse_predictions_csv(const std::string& text);

/// Header plus one row: accuracy, macro/micro precision, recall, F1, macro AUC.
std::string metric_summary_csv(const MetricSet& metrics);

}  // namespace loomline::metrics
