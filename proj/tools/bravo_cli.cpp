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

// Command-line front end.
//
// Exit status: 0 success, 1 validation failure, 2 evaluation degeneracy,
// 3 I/O error.

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bravo/bravo.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitDegenerate = 2;
constexpr int kExitIo = 3;

int exit_code_for(bravo::ErrorCode code) {
  using bravo::ErrorCode;
  switch (code) {
    case ErrorCode::kMissingSubset:
    case ErrorCode::kDegenerateSubset:
    case ErrorCode::kEmptyEvaluation:
    case ErrorCode::kDegenerateClasses:
    case ErrorCode::kNoPositives:
    case ErrorCode::kDegenerateVariance:
      return kExitDegenerate;
    case ErrorCode::kIoFailure:
    case ErrorCode::kEncodingFailure:
      return kExitIo;
    default:
      return kExitValidation;
  }
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw bravo::Error(bravo::ErrorCode::kIoFailure, "cannot write " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw bravo::Error(bravo::ErrorCode::kIoFailure, "cannot create " + dir.string() + ": " + ec.message());
}

std::vector<bravo::AggregateReport> read_reports(const std::vector<std::string>& paths) {
  std::vector<bravo::AggregateReport> reports;
  for (const auto& p : paths) reports.push_back(bravo::read_report(p));
  return reports;
}

void print_violations(const bravo::ValidationReport& report) {
  for (const auto& v : report.violations) {
    std::cerr << "  " << v.frame << ": " << bravo::to_string(v.rule) << ": " << v.detail << "\n";
  }
}

struct ValidateArgs {
  std::string submission;
  std::string gt_root;
  std::string out;
  unsigned threads = 0;
  bool strict = false;
};

int cmd_validate(const ValidateArgs& a) {
  const bravo::Discovery d = bravo::load_submission(a.submission, a.gt_root, a.strict);
  bravo::ValidationReport report = d.unexpected;
  report.merge(bravo::validate_submission(d.manifest, a.threads));
  bravo::ReportJson j = bravo::to_json(report);
  j["submission_id"] = d.manifest.submission_id;
  j["frames"] = d.manifest.entries.size();
  const std::string text = j.dump(2) + "\n";
  if (a.out.empty()) {
    std::cout << text;
  } else {
    write_file(a.out, text);
  }
  if (report.ok()) {
    std::cerr << "ok: " << d.manifest.entries.size() << " frame(s)\n";
    return kExitOk;
  }
  std::cerr << report.violations.size() << " violation(s)\n";
  print_violations(report);
  return kExitValidation;
}

struct EvaluateArgs {
  std::string submission;
  std::string gt_root;
  std::string submission_id;
  bravo::RunConfig config;
};

int cmd_evaluate(const EvaluateArgs& a) {
  const bravo::Discovery d = bravo::load_submission(a.submission, a.gt_root, a.config.strict_validation);
  bravo::SubmissionManifest manifest = d.manifest;
  if (!a.submission_id.empty()) manifest.submission_id = a.submission_id;
  ensure_dir(a.config.output_dir);
  try {
    if (!d.unexpected.ok()) throw bravo::ValidationError(d.unexpected);
    const bravo::AggregateReport report = bravo::evaluate_submission(manifest, a.config);
    bravo::write_report(a.config.output_dir / "report.json", report);
    const std::string table = bravo::render_report_table(report);
    write_file(a.config.output_dir / "report.txt", table);
    std::cout << table;
    return kExitOk;
  } catch (const bravo::ValidationError& e) {
    write_file(a.config.output_dir / "violations.json", bravo::to_json(e.report()).dump(2) + "\n");
    std::cerr << "error: " << e.what() << "\n";
    print_violations(e.report());
    return kExitValidation;
  }
}

struct RankArgs {
  std::vector<std::string> reports;
  std::string out;
};

int cmd_rank(const RankArgs& a) {
  const auto reports = read_reports(a.reports);
  const auto rows = bravo::rank(reports);
  const std::string table = bravo::render_leaderboard(rows);
  if (!a.out.empty()) write_file(a.out, table);
  std::cout << table;
  return kExitOk;
}

struct CombineArgs {
  std::vector<std::string> inputs;
  std::string out;
  std::string out_probs;
};

int cmd_combine(const CombineArgs& a) {
  std::vector<bravo::ProbabilityMap> maps;
  for (const auto& p : a.inputs) maps.push_back(bravo::read_probability_map(p));
  const bravo::ProbabilityMap mean = bravo::ensemble_mean(maps);
  const bravo::DecodedPrediction decoded = bravo::argmax_decode(mean);
  bravo::write_class_png(a.out + std::string(bravo::kPredSuffix), decoded.classes);
  bravo::write_conf_png(a.out + std::string(bravo::kConfSuffix), decoded.confidence);
  if (!a.out_probs.empty()) bravo::write_probability_map(a.out_probs, mean);
  return kExitOk;
}

int cmd_renormalize(const std::string& in, const std::string& out) {
  bravo::write_conf_png(out, bravo::renormalize_map(bravo::read_conf_png(in)));
  return kExitOk;
}

struct SynthArgs {
  bravo::FixtureSpec spec;
  std::string calibration = "perfect";
  std::string out;
};

int cmd_synth(SynthArgs a) {
  if (a.calibration == "perfect") {
    a.spec.calibration = bravo::CalibrationLaw::kPerfect;
  } else if (a.calibration == "over") {
    a.spec.calibration = bravo::CalibrationLaw::kOverConfident;
  } else {
    a.spec.calibration = bravo::CalibrationLaw::kUnderConfident;
  }
  const auto manifest = bravo::write_fixture(a.spec, a.out);
  std::cerr << "wrote " << manifest.entries.size() << " frame(s) to " << a.out << "\n";
  return kExitOk;
}

struct AnalyzeArgs {
  std::vector<std::string> reports;
  std::string out;
};

int cmd_analyze(const AnalyzeArgs& a) {
  std::vector<bravo::SubmissionPoint> points;
  for (const auto& r : read_reports(a.reports)) points.push_back(bravo::point_from_report(r));
  ensure_dir(a.out);
  bravo::emit_scatter(points, a.out);
  if (points.size() >= 3) {
    bravo::emit_correlogram(bravo::correlogram(points), a.out);
  } else {
    std::cerr << "correlogram skipped: needs at least 3 reports\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reliability benchmark evaluation for semantic segmentation"};
  app.require_subcommand(1);
  std::function<int()> run;

  ValidateArgs va;
  auto* validate = app.add_subcommand("validate", "Check submission files against the format rules");
  validate->add_option("submission", va.submission, "Submission directory or manifest file")->required();
  validate->add_option("--gt-root", va.gt_root, "Ground-truth tree (defaults to the submission directory)");
  validate->add_option("--out", va.out, "Write the violation report here instead of stdout");
  validate->add_option("--threads", va.threads, "Worker threads (0 = all cores)");
  validate->add_flag("--strict", va.strict, "Also reject unexpected files and directories");
  validate->callback([&] { run = [&] { return cmd_validate(va); }; });

  EvaluateArgs ea;
  std::string eval_out = ".";
  auto* evaluate = app.add_subcommand("evaluate", "Score a submission and write report.json / report.txt");
  evaluate->add_option("submission", ea.submission, "Submission directory or manifest file")->required();
  evaluate->add_option("--gt-root", ea.gt_root, "Ground-truth tree (defaults to the submission directory)");
  evaluate->add_option("--out", eval_out, "Output directory")->capture_default_str();
  evaluate->add_option("--ece-bins", ea.config.ece_bins, "Calibration bins")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  evaluate->add_option("--threads", ea.config.threads, "Worker threads (0 = all cores)")->capture_default_str();
  evaluate->add_option("--track", ea.config.track, "Leaderboard track")->capture_default_str();
  evaluate->add_option("--submission-id", ea.submission_id, "Override the submission id");
  evaluate->add_flag("--strict", ea.config.strict_validation, "Also reject unexpected files and directories");
  evaluate->callback([&] {
    ea.config.output_dir = eval_out;
    run = [&] { return cmd_evaluate(ea); };
  });

  RankArgs ra;
  auto* rank = app.add_subcommand("rank", "Order reports by BRAVO Index");
  rank->add_option("reports", ra.reports, "report.json files")->required()->check(CLI::ExistingFile);
  rank->add_option("--out", ra.out, "Also write the table to this file");
  rank->callback([&] { run = [&] { return cmd_rank(ra); }; });

  CombineArgs ca;
  auto* combine = app.add_subcommand("combine", "Average probability maps and decode a prediction");
  combine->add_option("inputs", ca.inputs, "Probability map files")->required()->check(CLI::ExistingFile);
  combine->add_option("--out", ca.out, "Output prefix; writes <prefix>_pred.png and <prefix>_conf.png")
      ->required();
  combine->add_option("--out-probs", ca.out_probs, "Also write the averaged probability map");
  combine->callback([&] { run = [&] { return cmd_combine(ca); }; });

  std::string renorm_in, renorm_out;
  auto* renormalize = app.add_subcommand("renormalize", "Apply the piecewise-linear confidence remap");
  renormalize->add_option("input", renorm_in, "16-bit confidence PNG")->required()->check(CLI::ExistingFile);
  renormalize->add_option("output", renorm_out, "Output PNG")->required();
  renormalize->callback([&] { run = [&] { return cmd_renormalize(renorm_in, renorm_out); }; });

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "Write a seeded synthetic fixture");
  synth->add_option("--out", sa.out, "Output directory")->required();
  synth->add_option("--seed", sa.spec.seed, "Random seed")->capture_default_str();
  synth->add_option("--width", sa.spec.width, "Frame width")->capture_default_str();
  synth->add_option("--height", sa.spec.height, "Frame height")->capture_default_str();
  synth->add_option("--frames", sa.spec.frames_per_subset, "Frames per subset")->capture_default_str();
  synth->add_option("--error-rate", sa.spec.error_rate, "Mean error rate")->capture_default_str();
  synth->add_option("--calibration", sa.calibration, "perfect, over or under")
      ->capture_default_str()
      ->check(CLI::IsMember({"perfect", "over", "under"}));
  synth->add_option("--delta", sa.spec.delta, "Confidence shift for over/under")->capture_default_str();
  synth->add_option("--ood-fraction", sa.spec.ood_fraction, "Fraction of OOD pixels")->capture_default_str();
  synth->add_option("--void-fraction", sa.spec.void_fraction, "Fraction of void pixels")->capture_default_str();
  synth->add_option("--submission-id", sa.spec.submission_id, "Submission id")->capture_default_str();
  synth->callback([&] { run = [&] { return cmd_synth(sa); }; });

  AnalyzeArgs aa;
  auto* analyze = app.add_subcommand("analyze", "Scatter plot and subset correlogram over reports");
  analyze->add_option("reports", aa.reports, "report.json files")->required()->check(CLI::ExistingFile);
  analyze->add_option("--out", aa.out, "Output directory")->required();
  analyze->callback([&] { run = [&] { return cmd_analyze(aa); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    return run();
  } catch (const bravo::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    print_violations(e.report());
    return kExitValidation;
  } catch (const bravo::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
}
