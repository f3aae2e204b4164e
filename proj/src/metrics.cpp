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

#include "lungbeam/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "lungbeam/error.hpp"
#include "lungbeam/nifti.hpp"

namespace lungbeam::metrics {
namespace {

// Zero-denominator policy: 0 with the degenerate flag raised.
double ratio(double num, double den, bool& degenerate) {
  if (den == 0.0) {
    degenerate = true;
    return 0.0;
  }
  return num / den;
}

ClassMetrics from_counts(double tp, double fp, double fn, double tn) {
  ClassMetrics m;
  m.sens = ratio(tp, tp + fn, m.degenerate);
  m.spec = ratio(tn, tn + fp, m.degenerate);
  m.prec = ratio(tp, tp + fp, m.degenerate);
  m.f1 = ratio(2.0 * m.prec * m.sens, m.prec + m.sens, m.degenerate);
  return m;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : "nan"; }

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file_bytes(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

}  // namespace

long ConfusionMatrix::total() const {
  long t = 0;
  for (const auto& row : counts) t += std::accumulate(row.begin(), row.end(), 0L);
  return t;
}

long ConfusionMatrix::trace() const {
  long t = 0;
  for (int c = 0; c < size(); ++c) t += counts[c][c];
  return t;
}

long ConfusionMatrix::row_sum(int c) const { return std::accumulate(counts[c].begin(), counts[c].end(), 0L); }

long ConfusionMatrix::col_sum(int c) const {
  long t = 0;
  for (const auto& row : counts) t += row[c];
  return t;
}

ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> truth,
                          const std::vector<std::string>& classes) {
  if (predicted.size() != truth.size())
    fail(ErrorCode::LengthMismatch, "predictions and truth differ in length");
  if (predicted.empty()) fail(ErrorCode::EmptyInput, "no predictions to evaluate");
  const int k = static_cast<int>(classes.size());
  ConfusionMatrix cm{classes, std::vector<std::vector<long>>(k, std::vector<long>(k, 0))};
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= k || predicted[i] < 0 || predicted[i] >= k)
      fail(ErrorCode::UnknownClass, "class index outside [0, " + std::to_string(k) + ")");
    ++cm.counts[truth[i]][predicted[i]];
  }
  return cm;
}

ClassMetrics per_class(const ConfusionMatrix& cm, int c) {
  const double tp = static_cast<double>(cm.counts[c][c]);
  const double fn = static_cast<double>(cm.row_sum(c)) - tp;
  const double fp = static_cast<double>(cm.col_sum(c)) - tp;
  const double tn = static_cast<double>(cm.total()) - tp - fn - fp;
  return from_counts(tp, fp, fn, tn);
}

double accuracy(const ConfusionMatrix& cm) {
  const long total = cm.total();
  if (total == 0) fail(ErrorCode::EmptyInput, "empty confusion matrix");
  return static_cast<double>(cm.trace()) / static_cast<double>(total);
}

double kappa(const ConfusionMatrix& cm) {
  const double total = static_cast<double>(cm.total());
  const double po = accuracy(cm);
  double pe = 0.0;
  for (int c = 0; c < cm.size(); ++c) {
    pe += static_cast<double>(cm.row_sum(c)) * static_cast<double>(cm.col_sum(c));
  }
  pe /= total * total;
  if (pe == 1.0) {
    if (po == 1.0) return 1.0;
    fail(ErrorCode::DegenerateKappa, "chance agreement is 1");
  }
  return (po - pe) / (1.0 - pe);
}

Averages micro_macro(const ConfusionMatrix& cm) {
  const int k = cm.size();
  double tp = 0, fp = 0, fn = 0, tn = 0;
  Averages avg;
  for (int c = 0; c < k; ++c) {
    const double ctp = static_cast<double>(cm.counts[c][c]);
    const double cfn = static_cast<double>(cm.row_sum(c)) - ctp;
    const double cfp = static_cast<double>(cm.col_sum(c)) - ctp;
    tp += ctp;
    fn += cfn;
    fp += cfp;
    tn += static_cast<double>(cm.total()) - ctp - cfn - cfp;

    const ClassMetrics m = per_class(cm, c);
    avg.macro.sens += m.sens / k;
    avg.macro.spec += m.spec / k;
    avg.macro.prec += m.prec / k;
    avg.macro.f1 += m.f1 / k;
    avg.macro.degenerate = avg.macro.degenerate || m.degenerate;
  }
  avg.micro = from_counts(tp, fp, fn, tn);
  return avg;
}

RocCurve roc(std::span<const double> scores, std::span<const int> is_positive) {
  if (scores.size() != is_positive.size()) fail(ErrorCode::LengthMismatch, "scores and labels differ in length");
  long positives = 0;
  for (int p : is_positive) positives += p ? 1 : 0;
  const long negatives = static_cast<long>(is_positive.size()) - positives;
  if (positives == 0 || negatives == 0)
    fail(ErrorCode::SingleClassInput, "ROC needs at least one positive and one negative");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.thresholds.push_back(std::numeric_limits<double>::infinity());
  curve.fpr.push_back(0.0);
  curve.tpr.push_back(0.0);
  long tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double threshold = scores[order[i]];
    while (i < order.size() && scores[order[i]] == threshold) {
      if (is_positive[order[i]]) {
        ++tp;
      } else {
        ++fp;
      }
      ++i;
    }
    curve.thresholds.push_back(threshold);
    curve.fpr.push_back(static_cast<double>(fp) / static_cast<double>(negatives));
    curve.tpr.push_back(static_cast<double>(tp) / static_cast<double>(positives));
  }
  return curve;
}

double auc(const RocCurve& curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.fpr.size(); ++i) {
    area += (curve.fpr[i] - curve.fpr[i - 1]) * (curve.tpr[i] + curve.tpr[i - 1]) * 0.5;
  }
  return area;
}

MulticlassRoc roc_one_vs_rest(const std::vector<std::vector<double>>& scores, std::span<const int> truth,
                              int class_count) {
  if (scores.size() != truth.size()) fail(ErrorCode::LengthMismatch, "scores and truth differ in length");
  MulticlassRoc out;
  std::vector<double> pooled_scores;
  std::vector<int> pooled_labels;
  double auc_sum = 0.0;
  int auc_n = 0;
  for (int c = 0; c < class_count; ++c) {
    std::vector<double> s;
    std::vector<int> y;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (static_cast<int>(scores[i].size()) != class_count)
        fail(ErrorCode::LengthMismatch, "score vector has the wrong number of classes");
      s.push_back(scores[i][c]);
      y.push_back(truth[i] == c ? 1 : 0);
    }
    pooled_scores.insert(pooled_scores.end(), s.begin(), s.end());
    pooled_labels.insert(pooled_labels.end(), y.begin(), y.end());
    try {
      RocCurve curve = roc(s, y);
      const double a = auc(curve);
      out.per_class.emplace_back(std::move(curve));
      out.per_class_auc.emplace_back(a);
      auc_sum += a;
      ++auc_n;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingleClassInput) throw;
      out.per_class.emplace_back(std::nullopt);
      out.per_class_auc.emplace_back(std::nullopt);
    }
  }
  out.micro = roc(pooled_scores, pooled_labels);
  out.micro_auc = auc(out.micro);
  if (auc_n > 0) out.macro_auc = auc_sum / auc_n;
  return out;
}

Report evaluate(std::span<const int> predicted, std::span<const int> truth,
                const std::vector<std::vector<double>>& scores, const std::vector<std::string>& classes) {
  Report r;
  r.cm = confusion(predicted, truth, classes);
  for (int c = 0; c < r.cm.size(); ++c) r.classes.push_back(per_class(r.cm, c));
  r.averages = micro_macro(r.cm);
  r.accuracy = accuracy(r.cm);
  try {
    r.kappa = kappa(r.cm);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateKappa) throw;
  }
  r.roc = roc_one_vs_rest(scores, truth, r.cm.size());
  return r;
}

std::string metrics_csv(const Report& report) {
  std::string text = "row,sens,spec,prec,f1,auc,degenerate\n";
  auto line = [&](const std::string& name, const ClassMetrics& m, const std::optional<double>& a) {
    text += name + "," + fmt(m.sens) + "," + fmt(m.spec) + "," + fmt(m.prec) + "," + fmt(m.f1) + "," + fmt(a) +
            "," + (m.degenerate ? "1" : "0") + "\n";
  };
  for (int c = 0; c < report.cm.size(); ++c) line(report.cm.classes[c], report.classes[c], report.roc.per_class_auc[c]);
  line("micro", report.averages.micro, report.roc.micro_auc);
  line("macro", report.averages.macro, report.roc.macro_auc);
  return text;
}

std::string summary_csv(const Report& report) {
  return "metric,value\naccuracy," + fmt(report.accuracy) + "\nkappa," + fmt(report.kappa) + "\npatients," +
         std::to_string(report.cm.total()) + "\n";
}

std::string confusion_csv(const ConfusionMatrix& cm) {
  std::string text = "truth\\predicted";
  for (const auto& c : cm.classes) text += "," + c;
  text += "\n";
  for (int r = 0; r < cm.size(); ++r) {
    text += cm.classes[r];
    for (long v : cm.counts[r]) text += "," + std::to_string(v);
    text += "\n";
  }
  return text;
}

std::string roc_csv(const RocCurve& curve) {
  std::string text = "threshold,fpr,tpr\n";
  for (std::size_t i = 0; i < curve.fpr.size(); ++i) {
    const double t = curve.thresholds[i];
    text += (std::isinf(t) ? std::string("inf") : fmt(t)) + "," + fmt(curve.fpr[i]) + "," + fmt(curve.tpr[i]) + "\n";
  }
  return text;
}

std::string text_table(const Report& report) {
  std::string text;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-10s %8s %8s %8s %8s %8s\n", "", "Sens", "Spec", "Prec", "F1", "AUC");
  text += buf;
  auto line = [&](const std::string& name, const ClassMetrics& m, const std::optional<double>& a) {
    std::snprintf(buf, sizeof buf, "%-10s %8.4f %8.4f %8.4f %8.4f %8s%s\n", name.c_str(), m.sens, m.spec, m.prec,
                  m.f1, a ? fmt(*a).substr(0, 6).c_str() : "n/a", m.degenerate ? "  (degenerate)" : "");
    text += buf;
  };
  for (int c = 0; c < report.cm.size(); ++c) line(report.cm.classes[c], report.classes[c], report.roc.per_class_auc[c]);
  line("micro", report.averages.micro, report.roc.micro_auc);
  line("macro", report.averages.macro, report.roc.macro_auc);
  std::snprintf(buf, sizeof buf, "\nAccuracy %.4f   Kappa %s   Patients %ld\n", report.accuracy,
                report.kappa ? fmt(*report.kappa).substr(0, 6).c_str() : "n/a", report.cm.total());
  text += buf;
  return text;
}

void write_report(const Report& report, const std::vector<std::string>& class_keys,
                  const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) fail(ErrorCode::IoFailure, "cannot create " + out_dir.string());
  write_text(out_dir / "metrics.csv", metrics_csv(report));
  write_text(out_dir / "summary.csv", summary_csv(report));
  write_text(out_dir / "confusion.csv", confusion_csv(report.cm));
  write_text(out_dir / "report.txt", text_table(report));
  for (std::size_t c = 0; c < class_keys.size(); ++c) {
    if (report.roc.per_class[c]) write_text(out_dir / ("roc_" + class_keys[c] + ".csv"), roc_csv(*report.roc.per_class[c]));
  }
  write_text(out_dir / "roc_micro.csv", roc_csv(report.roc.micro));
}

}  // namespace lungbeam::metrics
