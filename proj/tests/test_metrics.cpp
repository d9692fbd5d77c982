/* Copyright 2026 The BRAVO Evaluation Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/


#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "bravo/metrics.hpp"
#include "bravo/tools.hpp"
#include "oracles.hpp"

namespace bravo {
namespace {

ScoreHistogram Hist(std::initializer_list<std::size_t> pos, std::initializer_list<std::size_t> neg,
                    std::size_t levels = 8) {
  ScoreHistogram h(levels);
  for (auto l : pos) h.add(l, true);
  for (auto l : neg) h.add(l, false);
  return h;
}

ConfusionMatrix Confusion(const std::vector<int>& gt, const std::vector<int>& pred) {
  ConfusionMatrix c;
  for (std::size_t i = 0; i < gt.size(); ++i) c.add(gt[i], pred[i]);
  return c;
}

// ---------------------------------------------------------------------------
// Accumulation

TEST(AccumulateTest, PerfectPredictionIsDiagonal) {
  GroundTruthFrame gt(4, 1, std::vector<std::uint8_t>{0, 3, 3, 18});
  ClassMap pred(4, 1, std::vector<std::uint8_t>{0, 3, 3, 18});
  ConfidenceMap conf(4, 1, 50000);
  SemanticAccumulator acc;
  accumulate_semantic(acc, pred, conf, gt, pixel_roles(gt, Subset::kAcdc, EvalMode::kSemantic));
  EXPECT_EQ(acc.confusion(3, 3), 2u);
  EXPECT_EQ(acc.confusion.total(), 4u);
  EXPECT_EQ(acc.correctness.total_pos(), 4u);
  EXPECT_EQ(acc.correctness.total_neg(), 0u);
}

TEST(AccumulateTest, AllVoidLeavesAccumulatorUnchanged) {
  GroundTruthFrame gt(3, 3, kVoidLabel);
  SemanticAccumulator acc;
  accumulate_semantic(acc, ClassMap(3, 3, 1), ConfidenceMap(3, 3, 9), gt,
                      pixel_roles(gt, Subset::kAcdc, EvalMode::kSemantic));
  EXPECT_EQ(acc, SemanticAccumulator());
}

TEST(AccumulateTest, TotalsMatchRoleCount) {
  std::mt19937_64 rng(11);
  GroundTruthFrame gt(64, 64);
  ClassMap pred(64, 64);
  ConfidenceMap conf(64, 64);
  std::size_t expected = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const auto r = rng() % 21;
    gt[i] = r == 19 ? kOodLabel : r == 20 ? kVoidLabel : static_cast<std::uint8_t>(r);
    expected += r < 19 ? 1 : 0;
    pred[i] = static_cast<std::uint8_t>(rng() % 19);
    conf[i] = static_cast<std::uint16_t>(rng());
  }
  SemanticAccumulator acc;
  accumulate_semantic(acc, pred, conf, gt, pixel_roles(gt, Subset::kSynObjs, EvalMode::kSemantic));
  EXPECT_EQ(acc.pixels(), expected);
  EXPECT_EQ(acc.correctness.total(), expected);
  EXPECT_EQ(acc.calibration.total(), expected);
}

TEST(AccumulateTest, ShapeMismatchIsRejected) {
  GroundTruthFrame gt(2, 2, 0);
  SemanticAccumulator acc;
  try {
    accumulate_semantic(acc, ClassMap(2, 3, 0), ConfidenceMap(2, 2, 0), gt,
                        pixel_roles(gt, Subset::kAcdc, EvalMode::kSemantic));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kRoleMapMismatch);
  }
}

TEST(AccumulateOodTest, ScoreIsReversedConfidence) {
  GroundTruthFrame gt(2, 1, std::vector<std::uint8_t>{kOodLabel, 4});
  ConfidenceMap conf(2, 1, std::vector<std::uint16_t>{0, 65535});
  ScoreHistogram h;
  accumulate_ood(h, conf, pixel_roles(gt, Subset::kSmiyc, EvalMode::kOod));
  EXPECT_EQ(h.pos(65535), 1u);
  EXPECT_EQ(h.neg(0), 1u);
  EXPECT_EQ(h.total(), 2u);
}

TEST(AccumulateOodTest, MixedFrameMatchesHandCount) {
  GroundTruthFrame gt(4, 1, std::vector<std::uint8_t>{kOodLabel, kOodLabel, 7, kVoidLabel});
  ConfidenceMap conf(4, 1, std::vector<std::uint16_t>{100, 100, 65000, 5});
  ScoreHistogram h;
  accumulate_ood(h, conf, pixel_roles(gt, Subset::kSynObjs, EvalMode::kOod));
  EXPECT_EQ(h.pos(65435), 2u);
  EXPECT_EQ(h.neg(535), 1u);
  EXPECT_EQ(h.total_pos(), 2u);
  EXPECT_EQ(h.total_neg(), 1u);
}

// ---------------------------------------------------------------------------
// Merge laws

TEST(MergeTest, MonoidLaws) {
  std::mt19937_64 rng(3);
  auto random_acc = [&] {
    SemanticAccumulator a;
    for (int i = 0; i < 500; ++i) {
      const int g = static_cast<int>(rng() % 19);
      const int p = rng() % 3 == 0 ? static_cast<int>(rng() % 19) : g;
      const auto level = static_cast<std::uint16_t>(rng());
      a.confusion.add(g, p);
      a.correctness.add(level, g == p);
      a.calibration.add(level, g == p);
    }
    return a;
  };
  const auto a = random_acc(), b = random_acc(), c = random_acc();
  const SemanticAccumulator e;
  EXPECT_EQ(merge(a, e), a);
  EXPECT_EQ(merge(e, a), a);
  EXPECT_EQ(merge(a, b), merge(b, a));
  EXPECT_EQ(merge(merge(a, b), c), merge(a, merge(b, c)));
}

TEST(MergeTest, ShapeMismatch) {
  ScoreHistogram a(8), b(16);
  EXPECT_THROW(a.merge(b), Error);
  CalibrationBins x(10), y(15);
  EXPECT_THROW(x.merge(y), Error);
}

// ---------------------------------------------------------------------------
// mIoU

TEST(MiouTest, DiagonalIsOne) { EXPECT_DOUBLE_EQ(miou(Confusion({0, 1, 2}, {0, 1, 2})), 1.0); }

TEST(MiouTest, HandExample) {
  const auto c = Confusion({0, 0, 1, 1}, {0, 1, 1, 1});
  const auto iou = per_class_iou(c);
  EXPECT_DOUBLE_EQ(*iou[0], 0.5);
  EXPECT_DOUBLE_EQ(*iou[1], 2.0 / 3.0);
  EXPECT_FALSE(iou[2].has_value());
  EXPECT_DOUBLE_EQ(miou(c), (0.5 + 2.0 / 3.0) / 2);
}

TEST(MiouTest, AbsentClassesAreSkipped) { EXPECT_DOUBLE_EQ(miou(Confusion({0, 0}, {0, 0})), 1.0); }

TEST(MiouTest, EmptyIsAnError) {
  try {
    miou(ConfusionMatrix());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyEvaluation);
  }
}

TEST(MiouTest, MatchesOracle) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> gt(2000), pred(2000);
    for (std::size_t i = 0; i < gt.size(); ++i) {
      gt[i] = static_cast<int>(rng() % 12);
      pred[i] = rng() % 4 == 0 ? static_cast<int>(rng() % 19) : gt[i];
    }
    EXPECT_DOUBLE_EQ(miou(Confusion(gt, pred)), oracle::miou(gt, pred));
  }
}

// ---------------------------------------------------------------------------
// ECE

CalibrationBins Bins(std::uint16_t level, int n, int correct, std::size_t b = 15) {
  CalibrationBins bins(b);
  for (int i = 0; i < n; ++i) bins.add(level, i < correct);
  return bins;
}

TEST(EceTest, PerfectConfidencePerfectAccuracy) { EXPECT_EQ(ece(Bins(65535, 10, 10)), 0.0); }

// 0.7 and 0.9 are not exact 16-bit levels; the residual is the quantization
// error of the nearest level, below 1e-5.
TEST(EceTest, AccuracyEqualsConfidence) {
  EXPECT_NEAR(ece(Bins(quantize_confidence(0.7), 10, 7)), 0.0, 1e-5);
}

TEST(EceTest, HalfCorrectAtNinety) {
  EXPECT_NEAR(ece(Bins(quantize_confidence(0.9), 10, 5)), 0.4, 1e-5);
}

TEST(EceTest, BinEdges) {
  CalibrationBins b(15);
  EXPECT_EQ(b.bin_index(0), 0u);
  EXPECT_EQ(b.bin_index(4368), 0u);
  EXPECT_EQ(b.bin_index(4369), 1u);  // exactly 1/15
  EXPECT_EQ(b.bin_index(65535), 14u);
  EXPECT_THROW(CalibrationBins(0), Error);
}

TEST(EceTest, MatchesOracle) {
  std::mt19937_64 rng(23);
  for (std::size_t bins : {1u, 10u, 15u, 20u}) {
    std::vector<std::uint16_t> levels(3000);
    std::vector<bool> correct(levels.size());
    CalibrationBins acc(bins);
    for (std::size_t i = 0; i < levels.size(); ++i) {
      levels[i] = static_cast<std::uint16_t>(rng());
      correct[i] = rng() % 65536 < levels[i];
      acc.add(levels[i], correct[i]);
    }
    EXPECT_DOUBLE_EQ(ece(acc), oracle::ece(levels, correct, bins)) << bins;
  }
}

// ---------------------------------------------------------------------------
// Ranking metrics

TEST(AurocTest, PerfectSeparation) { EXPECT_EQ(auroc(Hist({5, 6, 7}, {0, 1})), 1.0); }
TEST(AurocTest, AllTied) { EXPECT_EQ(auroc(Hist({3, 3}, {3, 3, 3})), 0.5); }
TEST(AurocTest, HandExample) { EXPECT_EQ(auroc(Hist({4, 3, 2, 1}, {3, 0})), 0.6875); }

TEST(AurocTest, DegenerateClasses) {
  try {
    auroc(Hist({1, 2}, {}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateClasses);
  }
  EXPECT_THROW(fpr_at_95tpr(Hist({}, {1})), Error);
}

TEST(FprTest, PerfectSeparation) { EXPECT_EQ(fpr_at_95tpr(Hist({5, 6, 7}, {0, 1})), 0.0); }
TEST(FprTest, HandExample) { EXPECT_EQ(fpr_at_95tpr(Hist({4, 3, 2, 1}, {3, 0})), 0.5); }
TEST(FprTest, AllTiedInterpolatesDiagonal) {
  EXPECT_NEAR(fpr_at_95tpr(Hist({2, 2}, {2, 2, 2})), 0.95, 1e-15);
}

TEST(AuprTest, PerfectSeparation) { EXPECT_EQ(aupr(Hist({5, 6, 7}, {0, 1})), 1.0); }
TEST(AuprTest, AllTiedGivesPrevalence) { EXPECT_DOUBLE_EQ(aupr(Hist({2}, {2, 2, 2})), 0.25); }

TEST(AuprTest, NoPositives) {
  try {
    aupr(Hist({}, {1, 2}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoPositives);
  }
}

TEST(AuprErrorTest, AllIncorrect) { EXPECT_EQ(aupr_error(Hist({}, {1, 4, 6})), 1.0); }
TEST(AuprErrorTest, IncorrectRankedLowest) { EXPECT_EQ(aupr_error(Hist({5, 6, 7}, {0, 1})), 1.0); }
TEST(AuprErrorTest, NoIncorrectPixel) { EXPECT_THROW(aupr_error(Hist({1, 2}, {})), Error); }

TEST(RankingTest, MatchesSortOracle) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 100 + rng() % 5000;
    const std::size_t distinct = 1 + rng() % (trial % 2 == 0 ? 20 : 65536);
    auto pop = oracle::random_population(rng, n, distinct, 0.3);
    const auto h = oracle::to_histogram(pop);
    EXPECT_NEAR(auroc(h), oracle::auroc(pop), 1e-12);
    EXPECT_NEAR(fpr_at_95tpr(h), oracle::fpr_at_tpr(pop), 1e-12);
    EXPECT_NEAR(aupr(h), oracle::average_precision(pop), 1e-12);
    EXPECT_NEAR(aupr_error(h), oracle::average_precision_of_negatives(pop), 1e-12);
  }
}

TEST(RankingTest, AurocComplementSymmetry) {
  std::mt19937_64 rng(9);
  const auto h = oracle::to_histogram(oracle::random_population(rng, 3000, 300, 0.4));
  EXPECT_NEAR(auroc(h.complement()), auroc(h), 1e-15);
}

TEST(RankingTest, InvariantUnderIncreasingRemap) {
  std::mt19937_64 rng(13);
  const auto pop = oracle::random_population(rng, 4000, 500, 0.5);
  ScoreHistogram a, b(2 * 65535 + 1);
  for (const auto& s : pop) {
    a.add(s.level, s.positive);
    // l + floor(l^2 / 65535) is strictly increasing on the integers.
    const std::uint64_t l = s.level;
    b.add(l + l * l / 65535, s.positive);
  }
  EXPECT_EQ(auroc(a), auroc(b));
  EXPECT_EQ(fpr_at_95tpr(a), fpr_at_95tpr(b));
  EXPECT_EQ(aupr(a), aupr(b));
  EXPECT_EQ(aupr_error(a), aupr_error(b));
}

}  // namespace
}  // namespace bravo
