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

#include "lungbeam/consensus.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

#include "lungbeam/csv.hpp"
#include "lungbeam/error.hpp"

namespace lungbeam {
namespace {

void check_scores(const ViewScores& s, ClassScheme scheme) {
  const auto k = static_cast<std::size_t>(class_count(scheme));
  const std::string who = "patient '" + s.patient_id + "' view " + std::to_string(s.view_index);
  if (s.scores.size() != k)
    fail(ErrorCode::MalformedScores, who + ": expected " + std::to_string(k) + " scores");
  double sum = 0.0;
  for (double v : s.scores) {
    if (!std::isfinite(v) || v < 0.0) fail(ErrorCode::MalformedScores, who + ": negative or non-finite score");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-6) fail(ErrorCode::MalformedScores, who + ": scores do not sum to 1");
}

}  // namespace

int vote_from_scores(const ViewScores& scores, ClassScheme scheme) {
  check_scores(scores, scheme);
  // max_element returns the first maximum, i.e. the canonical-order tie rule.
  return static_cast<int>(std::max_element(scores.scores.begin(), scores.scores.end()) - scores.scores.begin());
}

ConsensusResult aggregate(const std::vector<ViewScores>& rows, ClassScheme scheme, const ConsensusOptions& options) {
  if (rows.empty()) fail(ErrorCode::IncompleteBatch, "no views to aggregate");
  const int k = class_count(scheme);
  ConsensusResult result;
  result.patient_id = rows.front().patient_id;
  result.votes_per_class.assign(k, 0);
  result.score_mass.assign(k, 0.0);

  std::map<Plane, std::vector<int>> per_plane;
  std::set<std::pair<Plane, int>> seen;
  // Accumulate mass in a fixed order so the result is independent of row order.
  std::map<std::pair<Plane, int>, const ViewScores*> ordered;
  for (const auto& row : rows) {
    if (row.patient_id != result.patient_id)
      fail(ErrorCode::MixedPatients, "rows for '" + result.patient_id + "' and '" + row.patient_id + "'");
    if (row.plane == Plane::Sagittal)
      fail(ErrorCode::MalformedScores, "patient '" + row.patient_id + "': sagittal views are not part of the protocol");
    if (!seen.insert({row.plane, row.view_index}).second)
      fail(ErrorCode::MalformedScores, "patient '" + row.patient_id + "': duplicate " + to_string(row.plane) +
                                           " view " + std::to_string(row.view_index));
    ordered[{row.plane, row.view_index}] = &row;
  }
  for (const auto& [key, row] : ordered) {
    const int vote = vote_from_scores(*row, scheme);
    auto& tally = per_plane[key.first];
    if (tally.empty()) tally.assign(k, 0);
    ++tally[vote];
    ++result.votes_per_class[vote];
    for (int c = 0; c < k; ++c) result.score_mass[c] += row->scores[c];
  }
  for (const auto& [plane, tally] : per_plane) {
    const int count = std::accumulate(tally.begin(), tally.end(), 0);
    if (options.strict_batch && count != options.batch_size)
      fail(ErrorCode::IncompleteBatch, "patient '" + result.patient_id + "': " + to_string(plane) + " has " +
                                           std::to_string(count) + " views, expected " +
                                           std::to_string(options.batch_size));
    result.planes.push_back(plane);
    result.plane_votes.push_back(tally);
  }

  int best = 0;
  for (int c = 1; c < k; ++c) {
    const int v = result.votes_per_class[c];
    const int bv = result.votes_per_class[best];
    if (v > bv || (v == bv && result.score_mass[c] > result.score_mass[best])) best = c;
  }
  result.predicted = best;
  return result;
}

std::vector<double> consensus_distribution(const ConsensusResult& result) {
  const int total = std::accumulate(result.votes_per_class.begin(), result.votes_per_class.end(), 0);
  std::vector<double> dist(result.votes_per_class.size(), 0.0);
  if (total == 0) return dist;
  for (std::size_t c = 0; c < dist.size(); ++c) dist[c] = static_cast<double>(result.votes_per_class[c]) / total;
  return dist;
}

ScoreTable read_scores(const std::filesystem::path& path) {
  const csv::Table table = csv::read(path);
  const std::string src = path.string();
  ScoreTable out;
  out.scheme = table.column("score_cap") >= 0 || table.column("score_normal") >= 0 ? ClassScheme::Ternary
                                                                                     : ClassScheme::Binary;
  const int c_id = table.require("patient_id", src);
  const int c_plane = table.require("plane", src);
  const int c_view = table.require("view_index", src);
  std::vector<int> c_scores;
  for (const auto& key : class_keys(out.scheme)) c_scores.push_back(table.require("score_" + key, src));

  for (const auto& row : table.rows) {
    const std::string where = src + ":" + std::to_string(row.line);
    ViewScores s;
    s.patient_id = row.fields[c_id];
    if (s.patient_id.empty()) fail(ErrorCode::MalformedCsv, where + ": empty patient_id");
    try {
      s.plane = parse_plane(row.fields[c_plane]);
    } catch (const Error&) {
      fail(ErrorCode::MalformedCsv, where + ": unknown plane '" + row.fields[c_plane] + "'");
    }
    s.view_index = static_cast<int>(csv::parse_int(row.fields[c_view], where));
    for (int c : c_scores) s.scores.push_back(csv::parse_double(row.fields[c], where));
    try {
      check_scores(s, out.scheme);
    } catch (const Error& e) {
      fail(ErrorCode::MalformedScores, where + ": " + e.detail());
    }
    out.rows.push_back(std::move(s));
  }
  return out;
}

std::vector<ConsensusResult> aggregate_all(const ScoreTable& table, const ConsensusOptions& options) {
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<ViewScores>> groups;
  for (const auto& row : table.rows) {
    auto [it, inserted] = groups.try_emplace(row.patient_id);
    if (inserted) order.push_back(row.patient_id);
    it->second.push_back(row);
  }
  std::vector<ConsensusResult> results;
  results.reserve(order.size());
  for (const auto& id : order) results.push_back(aggregate(groups[id], table.scheme, options));
  return results;
}

std::string consensus_csv(const std::vector<ConsensusResult>& results, ClassScheme scheme) {
  std::vector<std::string> header{"patient_id"};
  for (const auto& key : class_keys(scheme)) header.push_back("votes_" + key);
  header.push_back("predicted");
  std::string text = csv::join(header) + "\n";
  for (const auto& r : results) {
    std::vector<std::string> fields{r.patient_id};
    for (int v : r.votes_per_class) fields.push_back(std::to_string(v));
    fields.push_back(class_names(scheme)[r.predicted]);
    text += csv::join(fields) + "\n";
  }
  return text;
}

PredictionTable read_predictions(const std::filesystem::path& path) {
  const csv::Table table = csv::read(path);
  const std::string src = path.string();
  PredictionTable out;
  out.scheme = table.column("votes_cap") >= 0 || table.column("votes_normal") >= 0 ? ClassScheme::Ternary
                                                                                   : ClassScheme::Binary;
  const int c_id = table.require("patient_id", src);
  const int c_pred = table.require("predicted", src);
  std::vector<int> c_votes;
  for (const auto& key : class_keys(out.scheme)) c_votes.push_back(table.require("votes_" + key, src));
  for (const auto& row : table.rows) {
    const std::string where = src + ":" + std::to_string(row.line);
    out.patient_ids.push_back(row.fields[c_id]);
    std::vector<int> votes;
    for (int c : c_votes) {
      const long v = csv::parse_int(row.fields[c], where);
      if (v < 0) fail(ErrorCode::MalformedCsv, where + ": negative vote count");
      votes.push_back(static_cast<int>(v));
    }
    out.votes.push_back(std::move(votes));
    const auto cls = try_parse_class(out.scheme, row.fields[c_pred]);
    if (!cls) fail(ErrorCode::UnknownClass, where + ": unknown class '" + row.fields[c_pred] + "'");
    out.predicted.push_back(*cls);
  }
  return out;
}

}  // namespace lungbeam
