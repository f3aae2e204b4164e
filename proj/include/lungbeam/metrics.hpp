// Copyright 2026 The Lungbeam Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lungbeam::metrics {

// Rows are the true class, columns the predicted class.
struct ConfusionMatrix {
  std::vector<std::string> classes;
  std::vector<std::vector<long>> counts;

  int size() const { return static_cast<int>(classes.size()); }
  long total() const;
  long trace() const;
  long row_sum(int c) const;
  long col_sum(int c) const;
};

// Throws LengthMismatch, EmptyInput, UnknownClass (label outside [0, K)).
ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> truth,
                          const std::vector<std::string>& classes);

struct ClassMetrics {
  double sens = 0.0;
  double spec = 0.0;
  double prec = 0.0;
  double f1 = 0.0;
  // Some ratio had a zero denominator and was reported as 0.
  bool degenerate = false;
};

// One-vs-rest reduction for class c.
ClassMetrics per_class(const ConfusionMatrix& cm, int c);

double accuracy(const ConfusionMatrix& cm);

// (p_o - p_e) / (1 - p_e) with p_e from the marginals. Throws DegenerateKappa
// when p_e == 1 and agreement is not perfect.
double kappa(const ConfusionMatrix& cm);

struct Averages {
  ClassMetrics micro;  // TP/FP/FN/TN pooled over the one-vs-rest reductions
  ClassMetrics macro;  // unweighted mean of per_class
};

Averages micro_macro(const ConfusionMatrix& cm);

struct RocCurve {
  std::vector<double> thresholds;  // +inf first, then distinct scores descending
  std::vector<double> fpr;
  std::vector<double> tpr;
};

// Positive iff score >= threshold. Throws SingleClassInput, LengthMismatch.
RocCurve roc(std::span<const double> scores, std::span<const int> is_positive);

// Trapezoidal area.
double auc(const RocCurve& curve);

struct MulticlassRoc {
  // nullopt where the class has no positives or no negatives.
  std::vector<std::optional<RocCurve>> per_class;
  std::vector<std::optional<double>> per_class_auc;
  RocCurve micro;
  double micro_auc = 0.0;
  std::optional<double> macro_auc;  // mean over classes with a defined AUC
};

// One-vs-rest curve per class plus the micro curve over pooled (item, class)
// decisions. `scores[i]` is the score vector of item i.
MulticlassRoc roc_one_vs_rest(const std::vector<std::vector<double>>& scores, std::span<const int> truth,
                              int class_count);

struct Report {
  ConfusionMatrix cm;
  std::vector<ClassMetrics> classes;
  Averages averages;
  double accuracy = 0.0;
  std::optional<double> kappa;
  MulticlassRoc roc;
};

Report evaluate(std::span<const int> predicted, std::span<const int> truth,
                const std::vector<std::vector<double>>& scores, const std::vector<std::string>& classes);

// row,sens,spec,prec,f1,auc,degenerate  (classes, then micro, macro)
std::string metrics_csv(const Report& report);
// metric,value  (accuracy, kappa, patients)
std::string summary_csv(const Report& report);
std::string confusion_csv(const ConfusionMatrix& cm);
// threshold,fpr,tpr
std::string roc_csv(const RocCurve& curve);
std::string text_table(const Report& report);

// Writes metrics.csv, summary.csv, confusion.csv, report.txt and roc_*.csv.
void write_report(const Report& report, const std::vector<std::string>& class_keys,
                  const std::filesystem::path& out_dir);

}  // namespace lungbeam::metrics
