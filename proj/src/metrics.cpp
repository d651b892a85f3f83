#include "loomline/metrics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

namespace loomline::metrics {

ConfusionCounts::ConfusionCounts(std::size_t k) : k_(k), cells_(k * k, 0) {
  if (k == 0) throw MetricError("confusion matrix needs at least one class");
}

void ConfusionCounts::add(std::size_t truth, std::size_t predicted) {
  if (truth >= k_ || predicted >= k_) {
    throw MetricError(fmt::format("label out of range [0,{}): ({}, {})", k_, truth, predicted));
  }
  ++cells_[truth * k_ + predicted];
  ++total_;
}

std::uint64_t ConfusionCounts::cell(std::size_t truth, std::size_t predicted) const {
  return cells_.at(truth * k_ + predicted);
}

std::uint64_t ConfusionCounts::trace() const {
  std::uint64_t t = 0;
  for (std::size_t i = 0; i < k_; ++i) t += cell(i, i);
  return t;
}

std::uint64_t ConfusionCounts::tp(std::size_t c) const { return cell(c, c); }

std::uint64_t ConfusionCounts::fp(std::size_t c) const {
  std::uint64_t n = 0;
  for (std::size_t r = 0; r < k_; ++r) {
    if (r != c) n += cell(r, c);
  }
  return n;
}

std::uint64_t ConfusionCounts::fn(std::size_t c) const {
  std::uint64_t n = 0;
  for (std::size_t p = 0; p < k_; ++p) {
    if (p != c) n += cell(c, p);
  }
  return n;
}

std::uint64_t ConfusionCounts::tn(std::size_t c) const {
  return total_ - tp(c) - fp(c) - fn(c);
}

ConfusionCounts confusion_matrix(std::span<const int> truth, std::span<const int> predicted,
                                 std::size_t k) {
  if (truth.size() != predicted.size()) {
    throw MetricError(fmt::format("length mismatch: {} true labels, {} predictions",
                                  truth.size(), predicted.size()));
  }
  ConfusionCounts counts(k);
  const auto in_range = [k](int v) { return v >= 0 && static_cast<std::size_t>(v) < k; };
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (!in_range(truth[i]) || !in_range(predicted[i])) {
      throw MetricError(fmt::format("label out of range [0,{}) at index {}: true {}, predicted {}",
                                    k, i, truth[i], predicted[i]));
    }
    counts.add(static_cast<std::size_t>(truth[i]), static_cast<std::size_t>(predicted[i]));
  }
  return counts;
}

std::optional<double> precision(const ConfusionCounts& counts, std::size_t c) {
  const auto tp = counts.tp(c);
  const auto denom = tp + counts.fp(c);
  if (denom == 0) return std::nullopt;
  return static_cast<double>(tp) / static_cast<double>(denom);
}

std::optional<double> recall(const ConfusionCounts& counts, std::size_t c) {
  const auto tp = counts.tp(c);
  const auto denom = tp + counts.fn(c);
  if (denom == 0) return std::nullopt;
  return static_cast<double>(tp) / static_cast<double>(denom);
}

std::optional<double> f1(const ConfusionCounts& counts, std::size_t c) {
  const auto p = precision(counts, c);
  const auto r = recall(counts, c);
  if (!p || !r) return std::nullopt;
  if (*p + *r == 0.0) return 0.0;
  return 2.0 * *p * *r / (*p + *r);
}

std::optional<double> accuracy(const ConfusionCounts& counts) {
  if (counts.total() == 0) return std::nullopt;
  return static_cast<double>(counts.trace()) / static_cast<double>(counts.total());
}

MacroAverage macro_average(std::span<const std::optional<double>> values) {
  MacroAverage out;
  double sum = 0.0;
  std::size_t defined = 0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++defined;
    } else {
      ++out.excluded;
    }
  }
  if (defined > 0) out.value = sum / static_cast<double>(defined);
  return out;
}

namespace {

void check_scores(const ScoreMatrix& scores, std::span<const int> truth, std::size_t k) {
  if (scores.size() != truth.size()) {
    throw MetricError(fmt::format("length mismatch: {} score rows, {} true labels",
                                  scores.size(), truth.size()));
  }
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i].size() != k) {
      throw MetricError(fmt::format("score row {} has {} entries, expected {}", i,
                                    scores[i].size(), k));
    }
    for (double s : scores[i]) {
      if (!std::isfinite(s)) throw MetricError(fmt::format("non-finite score at index {}", i));
    }
    if (truth[i] < 0 || static_cast<std::size_t>(truth[i]) >= k) {
      throw MetricError(fmt::format("label out of range [0,{}) at index {}: {}", k, i, truth[i]));
    }
  }
}

struct ClassBalance {
  std::uint64_t positives = 0;
  std::uint64_t negatives = 0;
};

ClassBalance balance_of(std::span<const int> truth, std::size_t c) {
  ClassBalance b;
  for (int t : truth) {
    if (static_cast<std::size_t>(t) == c) {
      ++b.positives;
    } else {
      ++b.negatives;
    }
  }
  return b;
}

std::vector<RocPoint> staircase(const ScoreMatrix& scores, std::span<const int> truth,
                                std::size_t c, const ClassBalance& balance) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a][c] > scores[b][c];
  });

  const auto P = static_cast<double>(balance.positives);
  const auto N = static_cast<double>(balance.negatives);
  std::vector<RocPoint> curve{{0.0, 0.0}};
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double threshold = scores[order[i]][c];
    // One step per distinct threshold.
    while (i < order.size() && scores[order[i]][c] == threshold) {
      if (static_cast<std::size_t>(truth[order[i]]) == c) {
        ++tp;
      } else {
        ++fp;
      }
      ++i;
    }
    curve.push_back({static_cast<double>(fp) / N, static_cast<double>(tp) / P});
  }
  return curve;
}

}  // namespace

std::vector<RocPoint> roc_curve(const ScoreMatrix& scores, std::span<const int> truth,
                                std::size_t c) {
  const std::size_t k = scores.empty() ? c + 1 : scores.front().size();
  if (c >= k) throw MetricError(fmt::format("class {} out of range [0,{})", c, k));
  check_scores(scores, truth, k);
  const auto balance = balance_of(truth, c);
  if (balance.positives == 0 || balance.negatives == 0) {
    throw MetricError(fmt::format("ROC undefined for class {}: {} positives, {} negatives", c,
                                  balance.positives, balance.negatives));
  }
  return staircase(scores, truth, c, balance);
}

double trapezoid_area(std::span<const RocPoint> curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    area += (curve[i].fpr - curve[i - 1].fpr) * (curve[i].tpr + curve[i - 1].tpr) / 2.0;
  }
  return area;
}

AucResult roc_auc(const ScoreMatrix& scores, std::span<const int> truth, std::size_t k) {
  check_scores(scores, truth, k);
  AucResult out;
  out.per_class.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    const auto balance = balance_of(truth, c);
    if (balance.positives == 0 || balance.negatives == 0) continue;
    const auto curve = staircase(scores, truth, c, balance);
    out.per_class[c] = trapezoid_area(curve);
  }
  out.macro = macro_average(out.per_class);
  return out;
}

MetricSet evaluate(std::span<const int> truth, std::span<const int> predicted,
                   const ScoreMatrix& scores, std::size_t k) {
  MetricSet m;
  m.confusion = confusion_matrix(truth, predicted, k);
  m.accuracy = accuracy(m.confusion);
  for (std::size_t c = 0; c < k; ++c) {
    m.precision.push_back(precision(m.confusion, c));
    m.recall.push_back(recall(m.confusion, c));
    m.f1.push_back(f1(m.confusion, c));
  }
  m.macro_precision = macro_average(m.precision);
  m.macro_recall = macro_average(m.recall);
  m.macro_f1 = macro_average(m.f1);
  m.micro_precision = m.accuracy;
  m.micro_recall = m.accuracy;
  m.micro_f1 = m.accuracy;
  if (scores.empty()) {
    m.auc.assign(k, std::nullopt);
    m.macro_auc = macro_average(m.auc);
  } else {
    auto auc = roc_auc(scores, truth, k);
    m.auc = std::move(auc.per_class);
    m.macro_auc = auc.macro;
  }
  return m;
}

namespace {

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json optional_vector_json(const std::vector<std::optional<double>>& values) {
  Json arr = Json::array();
  for (const auto& v : values) arr.push_back(optional_json(v));
  return arr;
}

Json macro_json(const MacroAverage& m) {
  return Json{{"value", optional_json(m.value)}, {"excluded_classes", m.excluded}};
}

}  // namespace

Json metric_set_to_json(const MetricSet& m) {
  Json doc = Json::object();
  doc["samples"] = m.confusion.total();
  doc["accuracy"] = optional_json(m.accuracy);
  doc["precision"] = optional_vector_json(m.precision);
  doc["recall"] = optional_vector_json(m.recall);
  doc["f1"] = optional_vector_json(m.f1);
  doc["macro_precision"] = macro_json(m.macro_precision);
  doc["macro_recall"] = macro_json(m.macro_recall);
  doc["macro_f1"] = macro_json(m.macro_f1);
  doc["micro_precision"] = optional_json(m.micro_precision);
  doc["micro_recall"] = optional_json(m.micro_recall);
  doc["micro_f1"] = optional_json(m.micro_f1);
  doc["auc"] = optional_vector_json(m.auc);
  doc["macro_auc"] = macro_json(m.macro_auc);
  Json matrix = Json::array();
  for (std::size_t r = 0; r < m.confusion.classes(); ++r) {
    Json row = Json::array();
    for (std::size_t c = 0; c < m.confusion.classes(); ++c) row.push_back(m.confusion.cell(r, c));
    matrix.push_back(std::move(row));
  }
  doc["confusion_matrix"] = std::move(matrix);
  return doc;
}

CsvError::CsvError(std::size_t line, const std::string& what)
    : std::runtime_error(fmt::format("line {}: {}", line, what)), line_(line) {}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

template <typename T>
T parse_number(std::string_view field, std::size_t line, const char* column) {
  field = trim(field);
  T value{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
    throw CsvError(line, fmt::format("{}: cannot parse '{}'", column, field));
  }
  return value;
}

}  // namespace

Predictions parse_predictions_csv(const std::string& text) {
  Predictions out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header_seen = false;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string_view line = trim(std::string_view(text).substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) {
      if (pos > text.size()) break;
      continue;
    }
    if (!header_seen) {
      if (line != kPredictionsHeader) {
        throw CsvError(line_no, fmt::format("expected header '{}'", kPredictionsHeader));
      }
      header_seen = true;
      continue;
    }
    const auto fields = split_fields(line);
    if (fields.size() != 7) {
      throw CsvError(line_no, fmt::format("expected 7 fields, got {}", fields.size()));
    }
    const int truth = parse_number<int>(fields[0], line_no, "true_label");
    const int predicted = parse_number<int>(fields[1], line_no, "predicted_label");
    if (truth < 0 || truth > 4 || predicted < 0 || predicted > 4) {
      throw CsvError(line_no, "labels must be in [0,4]");
    }
    std::vector<double> scores;
    double sum = 0.0;
    for (std::size_t i = 2; i < 7; ++i) {
      const double s = parse_number<double>(fields[i], line_no, "score");
      if (!(s >= 0.0 && s <= 1.0)) throw CsvError(line_no, "scores must lie in [0,1]");
      sum += s;
      scores.push_back(s);
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      throw CsvError(line_no, fmt::format("scores sum to {}, expected 1", sum));
    }
    out.truth.push_back(truth);
    out.predicted.push_back(predicted);
    out.scores.push_back(std::move(scores));
  }
  if (!header_seen) throw CsvError(1, "missing header");
  return out;
}

std::string metric_summary_csv(const MetricSet& m) {
  const auto cell = [](const std::optional<double>& v) {
    return v ? fmt::format("{}", *v) : std::string();
  };
  return fmt::format(
      "accuracy,macro_precision,macro_recall,macro_f1,micro_precision,micro_recall,micro_f1,"
      "macro_auc\n{},{},{},{},{},{},{},{}\n",
      cell(m.accuracy), cell(m.macro_precision.value), cell(m.macro_recall.value),
      cell(m.macro_f1.value), cell(m.micro_precision), cell(m.micro_recall), cell(m.micro_f1),
      cell(m.macro_auc.value));
}

}  // namespace loomline::metrics
