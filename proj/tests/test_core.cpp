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


#include <sstream>

#include <gtest/gtest.h>

#include "bravo/core.hpp"
#include "bravo/manifest.hpp"

namespace bravo {
namespace {

ClassMap Pred2x2(std::vector<std::uint8_t> v) { return ClassMap(2, 2, std::move(v)); }
ConfidenceMap Conf(std::size_t w, std::size_t h) { return ConfidenceMap(w, h, 40000); }
GroundTruthFrame Gt2x2(std::vector<std::uint8_t> v) { return GroundTruthFrame(2, 2, std::move(v)); }

TEST(RasterTest, RejectsWrongSampleCount) {
  EXPECT_THROW(ClassMap(2, 2, std::vector<std::uint8_t>(3)), Error);
}

TEST(RasterTest, RowMajorIndexing) {
  ClassMap m(3, 2, std::vector<std::uint8_t>{0, 1, 2, 3, 4, 5});
  EXPECT_EQ(m(2, 0), 2);
  EXPECT_EQ(m(0, 1), 3);
  EXPECT_TRUE(m.same_shape(3, 2));
  EXPECT_FALSE(m.same_shape(2, 3));
}

TEST(ValidatePairTest, AcceptsLegalFrame) {
  const auto r = validate_pair(Pred2x2({0, 5, 18, 3}), Conf(2, 2), Gt2x2({1, 2, 3, 4}));
  EXPECT_TRUE(r.ok());
}

TEST(ValidatePairTest, ClassNineteenIsOutOfRange) {
  const auto r = validate_pair(Pred2x2({0, 19, 19, 3}), Conf(2, 2), Gt2x2({1, 2, 3, 4}), "f0");
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_EQ(r.violations[0].rule, Rule::kClassOutOfRange);
  EXPECT_EQ(r.violations[0].frame, "f0");
  EXPECT_EQ(r.violations[0].value, 19);
  EXPECT_EQ(r.violations[0].count, 2u);
}

TEST(ValidatePairTest, DimensionMismatch) {
  const auto r = validate_pair(Pred2x2({0, 1, 2, 3}), Conf(2, 3), Gt2x2({1, 2, 3, 4}));
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.violations[0].rule, Rule::kDimensionMismatch);
}

TEST(ValidatePairTest, CollectsEveryViolation) {
  const auto r = validate_pair(Pred2x2({19, 200, 0, 0}), Conf(3, 3), Gt2x2({1, 100, 3, 4}));
  std::vector<Rule> rules;
  for (const auto& v : r.violations) rules.push_back(v.rule);
  EXPECT_EQ(rules, (std::vector<Rule>{Rule::kDimensionMismatch, Rule::kClassOutOfRange,
                                      Rule::kClassOutOfRange, Rule::kGroundTruthCodeInvalid}));
}

TEST(ValidatePairTest, OodAndVoidCodesAreLegal) {
  EXPECT_TRUE(validate_pair(Pred2x2({0, 0, 0, 0}), Conf(2, 2), Gt2x2({254, 255, 0, 18})).ok());
}

TEST(ValidatePairTest, AllVoidFrameIsFlagged) {
  const auto r = validate_pair(Pred2x2({0, 0, 0, 0}), Conf(2, 2), Gt2x2({255, 255, 255, 255}));
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_EQ(r.violations[0].rule, Rule::kGroundTruthAllVoid);
}

std::vector<PixelRole> Roles(std::vector<std::uint8_t> gt, Subset s, EvalMode m) {
  const auto map = pixel_roles(GroundTruthFrame(gt.size(), 1, gt), s, m);
  return {map.samples().begin(), map.samples().end()};
}

using R = PixelRole;

TEST(PixelRolesTest, SemanticOnAcdc) {
  EXPECT_EQ(Roles({3, 254, 255, 10}, Subset::kAcdc, EvalMode::kSemantic),
            (std::vector<R>{R::kSemanticValid, R::kExcluded, R::kExcluded, R::kSemanticValid}));
}

TEST(PixelRolesTest, OodOnSmiyc) {
  EXPECT_EQ(Roles({3, 254, 255, 10}, Subset::kSmiyc, EvalMode::kOod),
            (std::vector<R>{R::kOodNegative, R::kOodPositive, R::kExcluded, R::kOodNegative}));
}

TEST(PixelRolesTest, SmiycHasNoSemanticPixels) {
  EXPECT_EQ(Roles({3, 254}, Subset::kSmiyc, EvalMode::kSemantic),
            (std::vector<R>{R::kExcluded, R::kExcluded}));
}

TEST(PixelRolesTest, OodModeOutsideOodSubsetsIsEmpty) {
  for (Subset s : {Subset::kAcdc, Subset::kSynRain, Subset::kSynFlare, Subset::kOutOfContext}) {
    EXPECT_EQ(Roles({3, 254, 255}, s, EvalMode::kOod),
              (std::vector<R>{R::kExcluded, R::kExcluded, R::kExcluded}));
  }
}

TEST(PixelRolesTest, SynObjsHasBothModes) {
  EXPECT_EQ(Roles({3, 254}, Subset::kSynObjs, EvalMode::kSemantic),
            (std::vector<R>{R::kSemanticValid, R::kExcluded}));
  EXPECT_EQ(Roles({3, 254}, Subset::kSynObjs, EvalMode::kOod),
            (std::vector<R>{R::kOodNegative, R::kOodPositive}));
}

TEST(SubsetTest, ParseIsCaseInsensitive) {
  EXPECT_EQ(parse_subset("ACDC"), Subset::kAcdc);
  EXPECT_EQ(parse_subset("SynObjs"), Subset::kSynObjs);
  EXPECT_EQ(parse_subset("cityscapes"), std::nullopt);
  for (Subset s : kAllSubsets) EXPECT_EQ(parse_subset(subset_id(s)), s);
}

TEST(ManifestTest, RoundTrip) {
  SubmissionManifest m{"team-a",
                       {{"b", Subset::kSmiyc, "/d/b_pred.png", "/d/b_conf.png", "/g/b_gt.png"},
                        {"a", Subset::kAcdc, "/d/a_pred.png", "/d/a_conf.png", "/g/a_gt.png"}}};
  std::stringstream text;
  write_manifest(text, m, "/");
  const SubmissionManifest back = parse_manifest(text, "/");
  EXPECT_EQ(back.submission_id, "team-a");
  ASSERT_EQ(back.entries.size(), 2u);
  EXPECT_EQ(back.entries[1].frame_id, "a");
  EXPECT_EQ(back.entries[1].gt_path, fs::path("/g/a_gt.png"));
}

TEST(ManifestTest, RelativePathsResolveAgainstBase) {
  std::istringstream in(
      "# comment\nsubmission_id: x\n\nframe_id: f\nsubset: SMIYC\npred: s/f_pred.png\n"
      "conf: s/f_conf.png\ngt: s/f_gt.png\n");
  const auto m = parse_manifest(in, "/base");
  ASSERT_EQ(m.entries.size(), 1u);
  EXPECT_EQ(m.entries[0].subset, Subset::kSmiyc);
  EXPECT_EQ(m.entries[0].pred_path, fs::path("/base/s/f_pred.png"));
}

TEST(ManifestTest, MalformedLinesAreRejected) {
  std::istringstream no_colon("submission_id x\n");
  EXPECT_THROW(parse_manifest(no_colon, "."), Error);
  std::istringstream bad_subset("frame_id: f\nsubset: kitti\npred: a\nconf: b\ngt: c\n");
  EXPECT_THROW(parse_manifest(bad_subset, "."), Error);
}

TEST(ManifestTest, DuplicateFrameIds) {
  SubmissionManifest m{"x", {{"a", Subset::kAcdc, "p", "c", "g"}, {"a", Subset::kAcdc, "p", "c", "g"}}};
  const auto r = check_manifest(m);
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_EQ(r.violations[0].rule, Rule::kDuplicateFrameId);
}

}  // namespace
}  // namespace bravo
