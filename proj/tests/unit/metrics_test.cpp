#include <gtest/gtest.h>

#include <algorithm>

#include "loomline/metrics.hpp"
#include "loomline/random.hpp"

using namespace loomline::metrics;
using loomline::RandomStream;

namespace {

// Fraction of positive-negative pairs ordered correctly, ties counted half.
std::optional<double> brute_force_auc(const ScoreMatrix& scores, const std::vector<int>& truth,
                                      std::size_t c) {
  double good = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (static_cast<std::size_t>(truth[i]) != c) continue;
    for (std::size_t j = 0; j < truth.size(); ++j) {
      if (static_cast<std::size_t>(truth[j]) == c) continue;
      ++pairs;
      if (scores[i][c] > scores[j][c]) good += 1.0;
      if (scores[i][c] == scores[j][c]) good += 0.5;
    }
  }
  if (pairs == 0) return std::nullopt;
  return good / static_cast<double>(pairs);
}

struct NaiveCounts {
  long tp = 0, fp = 0, fn = 0, tn = 0;
};

NaiveCounts naive_counts(const std::vector<int>& t, const std::vector<int>& p, int c) {
  NaiveCounts n;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const bool is_true = t[i] == c;
    const bool is_pred = p[i] == c;
    if (is_true && is_pred) ++n.tp;
    if (!is_true && is_pred) ++n.fp;
    if (is_true && !is_pred) ++n.fn;
    if (!is_true && !is_pred) ++n.tn;
  }
  return n;
}

struct Instance {
  std::vector<int> truth;
  std::vector<int> predicted;
  ScoreMatrix scores;
};

Instance random_instance(RandomStream& rng, std::size_t n) {
  Instance x;
  const bool coarse = rng.bernoulli(0.5);  // coarse scores force ties
  for (std::size_t i = 0; i < n; ++i) {
    x.truth.push_back(static_cast<int>(rng.next_u64() % 5));
    x.predicted.push_back(static_cast<int>(rng.next_u64() % 5));
    std::vector<double> row(5);
    for (auto& s : row) {
      s = coarse ? static_cast<double>(rng.next_u64() % 4) / 4.0 : rng.uniform();
    }
    x.scores.push_back(std::move(row));
  }
  return x;
}

const std::vector<int> kTruth = {0, 0, 1};
const std::vector<int> kPred = {0, 1, 1};

}  // namespace

TEST(Confusion, HandEnumeration) {
  const auto m = confusion_matrix(kTruth, kPred);
  EXPECT_EQ(m.cell(0, 0), 1u);
  EXPECT_EQ(m.cell(0, 1), 1u);
  EXPECT_EQ(m.cell(1, 1), 1u);
  EXPECT_EQ(m.total(), 3u);
  EXPECT_EQ(m.trace(), 2u);
}

TEST(Confusion, PerfectIsDiagonal) {
  const std::vector<int> labels = {0, 1, 2, 3, 4, 4, 2};
  const auto m = confusion_matrix(labels, labels);
  for (std::size_t r = 0; r < 5; ++r) {
    for (std::size_t c = 0; c < 5; ++c) {
      if (r != c) { EXPECT_EQ(m.cell(r, c), 0u); }
    }
  }
  EXPECT_EQ(m.trace(), labels.size());
}

TEST(Confusion, EmptyIsZero) {
  const auto m = confusion_matrix({}, {});
  EXPECT_EQ(m.total(), 0u);
  for (std::size_t r = 0; r < 5; ++r) {
    for (std::size_t c = 0; c < 5; ++c) EXPECT_EQ(m.cell(r, c), 0u);
  }
}

TEST(Confusion, RejectsBadInput) {
  const std::vector<int> a = {0, 1};
  const std::vector<int> b = {0};
  EXPECT_THROW(confusion_matrix(a, b), MetricError);
  const std::vector<int> c = {0, 5};
  EXPECT_THROW(confusion_matrix(a, c), MetricError);
}

TEST(Scores, PerfectBinary) {
  const std::vector<int> t = {0, 1};
  const auto m = confusion_matrix(t, t, 2);
  EXPECT_EQ(m.tp(1), 1u);
  EXPECT_EQ(m.tn(1), 1u);
  EXPECT_EQ(precision(m, 1), 1.0);
  EXPECT_EQ(recall(m, 1), 1.0);
  EXPECT_EQ(f1(m, 1), 1.0);
  EXPECT_EQ(accuracy(m), 1.0);
}

TEST(Scores, HandCase) {
  const auto m = confusion_matrix(kTruth, kPred);
  EXPECT_EQ(precision(m, 0), 1.0);
  EXPECT_EQ(recall(m, 0), 0.5);
  EXPECT_DOUBLE_EQ(*f1(m, 0), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(*accuracy(m), 2.0 / 3.0);
  EXPECT_EQ(precision(m, 1), 0.5);
  EXPECT_EQ(recall(m, 1), 1.0);
}

TEST(Scores, AllZeroMatrixIsUndefined) {
  const ConfusionCounts m(5);
  EXPECT_FALSE(accuracy(m).has_value());
  for (std::size_t c = 0; c < 5; ++c) {
    EXPECT_FALSE(precision(m, c).has_value());
    EXPECT_FALSE(recall(m, c).has_value());
    EXPECT_FALSE(f1(m, c).has_value());
  }
}

TEST(Scores, ZeroPrecisionAndRecallGiveZeroF1) {
  const std::vector<int> t = {0, 1};
  const std::vector<int> p = {1, 0};
  const auto m = confusion_matrix(t, p, 2);
  EXPECT_EQ(precision(m, 0), 0.0);
  EXPECT_EQ(recall(m, 0), 0.0);
  EXPECT_EQ(f1(m, 0), 0.0);
}

TEST(Scores, MacroExcludesUndefined) {
  const std::vector<std::optional<double>> v = {1.0, std::nullopt, 0.5, std::nullopt, 0.0};
  const auto m = macro_average(v);
  EXPECT_EQ(m.value, 0.5);
  EXPECT_EQ(m.excluded, 2u);
  const std::vector<std::optional<double>> none = {std::nullopt};
  EXPECT_FALSE(macro_average(none).value.has_value());
}

TEST(Scores, EvaluateHandCase) {
  const auto m = evaluate(kTruth, kPred, {});
  EXPECT_DOUBLE_EQ(*m.accuracy, 2.0 / 3.0);
  EXPECT_EQ(m.micro_f1, m.accuracy);
  // classes 2..4 never occur: precision and recall undefined
  EXPECT_EQ(m.macro_precision.excluded, 3u);
  EXPECT_DOUBLE_EQ(*m.macro_precision.value, 0.75);
  EXPECT_DOUBLE_EQ(*m.macro_recall.value, 0.75);
  for (const auto& a : m.auc) EXPECT_FALSE(a.has_value());
}

TEST(Roc, HandCaseAuc) {
  // class 1 positives at 0.9 and 0.4, negatives at 0.6 and 0.1
  const ScoreMatrix s = {{0.1, 0.9}, {0.6, 0.4}, {0.4, 0.6}, {0.9, 0.1}};
  const std::vector<int> t = {1, 1, 0, 0};
  const auto r = roc_auc(s, t, 2);
  EXPECT_DOUBLE_EQ(*r.per_class[1], 0.75);
  EXPECT_DOUBLE_EQ(*brute_force_auc(s, t, 1), 0.75);
}

TEST(Roc, PerfectSeparation) {
  const ScoreMatrix s = {{0.9, 0.1}, {0.8, 0.2}, {0.3, 0.7}, {0.2, 0.8}};
  const std::vector<int> t = {0, 0, 1, 1};
  const auto r = roc_auc(s, t, 2);
  EXPECT_EQ(r.per_class[0], 1.0);
  EXPECT_EQ(r.per_class[1], 1.0);
}

TEST(Roc, SinglePairCurve) {
  const ScoreMatrix s = {{0.2, 0.8}, {0.7, 0.3}};
  const std::vector<int> t = {1, 0};
  const auto curve = roc_curve(s, t, 1);
  EXPECT_EQ(curve, (std::vector<RocPoint>{{0, 0}, {0, 1}, {1, 1}}));
  EXPECT_EQ(trapezoid_area(curve), 1.0);
}

TEST(Roc, ReversedScores) {
  const ScoreMatrix s = {{0.7, 0.3}, {0.2, 0.8}};
  const std::vector<int> t = {1, 0};
  const auto curve = roc_curve(s, t, 1);
  EXPECT_EQ(curve, (std::vector<RocPoint>{{0, 0}, {1, 0}, {1, 1}}));
  EXPECT_EQ(trapezoid_area(curve), 0.0);
}

TEST(Roc, TiesMakeDiagonalSteps) {
  const ScoreMatrix s = {{0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}, {0.5, 0.5}};
  const std::vector<int> t = {1, 0, 1, 0};
  const auto curve = roc_curve(s, t, 1);
  EXPECT_EQ(curve, (std::vector<RocPoint>{{0, 0}, {1, 1}}));
  EXPECT_EQ(trapezoid_area(curve), 0.5);
}

TEST(Roc, CurveAreaEqualsAuc) {
  RandomStream rng(3, "roc");
  for (int trial = 0; trial < 50; ++trial) {
    auto x = random_instance(rng, 40);
    const auto auc = roc_auc(x.scores, x.truth);
    for (std::size_t c = 0; c < 5; ++c) {
      if (!auc.per_class[c]) continue;
      EXPECT_EQ(trapezoid_area(roc_curve(x.scores, x.truth, c)), *auc.per_class[c]);
    }
  }
}

TEST(Roc, CurveIsMonotoneFromOriginToCorner) {
  RandomStream rng(4, "roc");
  const auto x = random_instance(rng, 50);
  for (std::size_t c = 0; c < 5; ++c) {
    const auto curve = roc_curve(x.scores, x.truth, c);
    EXPECT_EQ(curve.front(), (RocPoint{0, 0}));
    EXPECT_EQ(curve.back(), (RocPoint{1, 1}));
    for (std::size_t i = 1; i < curve.size(); ++i) {
      EXPECT_GE(curve[i].fpr, curve[i - 1].fpr);
      EXPECT_GE(curve[i].tpr, curve[i - 1].tpr);
    }
  }
}

TEST(Roc, MissingClassIsUndefined) {
  const ScoreMatrix s = {{0.6, 0.4}, {0.3, 0.7}};
  const std::vector<int> t = {0, 0};
  EXPECT_THROW(roc_curve(s, t, 0), MetricError);
  const auto r = roc_auc(s, t, 2);
  EXPECT_FALSE(r.per_class[0].has_value());
  EXPECT_FALSE(r.per_class[1].has_value());
  EXPECT_EQ(r.macro.excluded, 2u);
}

TEST(Roc, RandomScoresNearHalf) {
  RandomStream rng(2024, "auc");
  const auto x = random_instance(rng, 10000);
  const auto r = roc_auc(x.scores, x.truth);
  ASSERT_TRUE(r.macro.value.has_value());
  EXPECT_NEAR(*r.macro.value, 0.5, 0.05);
}

TEST(Properties, TrapezoidMatchesBruteForce) {
  RandomStream rng(500, "property");
  for (int trial = 0; trial < 500; ++trial) {
    const auto n = 1 + static_cast<std::size_t>(rng.next_u64() % 50);
    const auto x = random_instance(rng, n);
    const auto r = roc_auc(x.scores, x.truth);
    for (std::size_t c = 0; c < 5; ++c) {
      const auto expected = brute_force_auc(x.scores, x.truth, c);
      ASSERT_EQ(r.per_class[c].has_value(), expected.has_value());
      if (expected) { ASSERT_NEAR(*r.per_class[c], *expected, 1e-12) << "trial " << trial; }
    }
  }
}

TEST(Properties, CountsMatchNaiveReference) {
  RandomStream rng(501, "property");
  for (int trial = 0; trial < 500; ++trial) {
    const auto n = static_cast<std::size_t>(rng.next_u64() % 51);
    const auto x = random_instance(rng, n);
    const auto m = confusion_matrix(x.truth, x.predicted);
    long correct = 0;
    for (std::size_t i = 0; i < n; ++i) correct += x.truth[i] == x.predicted[i] ? 1 : 0;
    if (n == 0) {
      ASSERT_FALSE(accuracy(m).has_value());
    } else {
      ASSERT_EQ(*accuracy(m), static_cast<double>(correct) / static_cast<double>(n));
    }
    for (int c = 0; c < 5; ++c) {
      const auto k = naive_counts(x.truth, x.predicted, c);
      const auto cc = static_cast<std::size_t>(c);
      ASSERT_EQ(m.tp(cc), static_cast<std::uint64_t>(k.tp));
      ASSERT_EQ(m.fp(cc), static_cast<std::uint64_t>(k.fp));
      ASSERT_EQ(m.fn(cc), static_cast<std::uint64_t>(k.fn));
      ASSERT_EQ(m.tn(cc), static_cast<std::uint64_t>(k.tn));
      const auto p = precision(m, cc);
      const auto r = recall(m, cc);
      if (k.tp + k.fp == 0) {
        ASSERT_FALSE(p.has_value());
      } else {
        ASSERT_EQ(*p, static_cast<double>(k.tp) / static_cast<double>(k.tp + k.fp));
      }
      if (k.tp + k.fn == 0) {
        ASSERT_FALSE(r.has_value());
      } else {
        ASSERT_EQ(*r, static_cast<double>(k.tp) / static_cast<double>(k.tp + k.fn));
      }
      const auto f = f1(m, cc);
      if (!p || !r) {
        ASSERT_FALSE(f.has_value());
      } else if (*p + *r == 0.0) {
        ASSERT_EQ(*f, 0.0);
      } else {
        ASSERT_EQ(*f, 2.0 * *p * *r / (*p + *r));
      }
    }
  }
}

TEST(Properties, PermutationInvariance) {
  RandomStream rng(502, "perm");
  for (int trial = 0; trial < 50; ++trial) {
    auto x = random_instance(rng, 30);
    const auto before = evaluate(x.truth, x.predicted, x.scores);
    Instance y;
    std::vector<std::size_t> order(30);
    for (std::size_t i = 0; i < 30; ++i) order[i] = i;
    for (std::size_t i = 29; i > 0; --i) std::swap(order[i], order[rng.next_u64() % (i + 1)]);
    for (auto i : order) {
      y.truth.push_back(x.truth[i]);
      y.predicted.push_back(x.predicted[i]);
      y.scores.push_back(x.scores[i]);
    }
    const auto after = evaluate(y.truth, y.predicted, y.scores);
    EXPECT_EQ(after.confusion, before.confusion);
    EXPECT_EQ(after.accuracy, before.accuracy);
    EXPECT_EQ(after.f1, before.f1);
    for (std::size_t c = 0; c < 5; ++c) {
      ASSERT_EQ(after.auc[c].has_value(), before.auc[c].has_value());
      if (after.auc[c]) { EXPECT_NEAR(*after.auc[c], *before.auc[c], 1e-12); }
    }
  }
}

TEST(PredictionsCsv, ParsesRows) {
  const std::string text = std::string(kPredictionsHeader) +
                           "\n0,0,0.6,0.1,0.1,0.1,0.1\n0,1,0.2,0.5,0.1,0.1,0.1\n"
                           "1,1,0.1,0.6,0.1,0.1,0.1\n";
  const auto p = parse_predictions_csv(text);
  EXPECT_EQ(p.truth, kTruth);
  EXPECT_EQ(p.predicted, kPred);
  EXPECT_DOUBLE_EQ(*evaluate(p.truth, p.predicted, p.scores).accuracy, 2.0 / 3.0);
}

TEST(PredictionsCsv, ReportsLineNumbers) {
  const std::string header = std::string(kPredictionsHeader) + "\n";
  try {
    parse_predictions_csv(header + "0,0,0.6,0.1,0.1,0.1,0.1\n0,0,0.6,0.1\n");
    FAIL();
  } catch (const CsvError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  try {
    parse_predictions_csv(header + "0,0,0.9,0.9,0.1,0.1,0.1\n");
    FAIL();
  } catch (const CsvError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  try {
    parse_predictions_csv(header + "7,0,0.6,0.1,0.1,0.1,0.1\n");
    FAIL();
  } catch (const CsvError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(parse_predictions_csv("a,b\n"), CsvError);
  EXPECT_THROW(parse_predictions_csv(""), CsvError);
}

TEST(PredictionsCsv, ConstantScoresGiveHalf) {
  std::string text = std::string(kPredictionsHeader) + "\n";
  for (int i = 0; i < 20; ++i) text += std::to_string(i % 5) + ",0,0.2,0.2,0.2,0.2,0.2\n";
  const auto p = parse_predictions_csv(text);
  const auto m = evaluate(p.truth, p.predicted, p.scores);
  for (const auto& a : m.auc) EXPECT_EQ(a, 0.5);
}

TEST(Json, UndefinedAsNull) {
  const auto doc = metric_set_to_json(evaluate(kTruth, kPred, {}));
  EXPECT_TRUE(doc["precision"][2].is_null());
  EXPECT_EQ(doc["macro_precision"]["excluded_classes"], 3);
  EXPECT_EQ(doc["confusion_matrix"][0][1], 1);
  EXPECT_EQ(doc["samples"], 3);
}
