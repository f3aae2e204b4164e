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
#include <string>
#include <vector>

#include "lungbeam/camera.hpp"
#include "lungbeam/classes.hpp"

namespace lungbeam {

// Per-image class scores from the external classifier.
struct ViewScores {
  std::string patient_id;
  Plane plane = Plane::Axial;
  int view_index = 0;
  std::vector<double> scores;
};

struct ConsensusResult {
  std::string patient_id;
  std::vector<int> votes_per_class;
  // Planes present, in Plane order, with their tallies.
  std::vector<Plane> planes;
  std::vector<std::vector<int>> plane_votes;
  std::vector<double> score_mass;
  int predicted = 0;
};

struct ConsensusOptions {
  int batch_size = kViewsPerPlane;
  // Off: accept any non-empty per-plane batch.
  bool strict_batch = true;
};

// argmax; ties go to the lowest class index. Throws MalformedScores.
int vote_from_scores(const ViewScores& scores, ClassScheme scheme);

// Hard votes per image summed over planes; ties broken by larger total score
// mass, then canonical class order. Throws IncompleteBatch / MixedPatients /
// MalformedScores.
ConsensusResult aggregate(const std::vector<ViewScores>& rows, ClassScheme scheme,
                          const ConsensusOptions& options = {});

// Votes normalized to sum 1.
std::vector<double> consensus_distribution(const ConsensusResult& result);

// Scores CSV: patient_id,plane,view_index,score_<key>... The scheme follows
// the score columns present (three ternary, two binary).
struct ScoreTable {
  ClassScheme scheme = ClassScheme::Ternary;
  std::vector<ViewScores> rows;
};
ScoreTable read_scores(const std::filesystem::path& path);

// Groups rows by patient (first-appearance order) and aggregates each.
std::vector<ConsensusResult> aggregate_all(const ScoreTable& table, const ConsensusOptions& options = {});

// Output CSV: patient_id,votes_<key>...,predicted
std::string consensus_csv(const std::vector<ConsensusResult>& results, ClassScheme scheme);

struct PredictionTable {
  ClassScheme scheme = ClassScheme::Ternary;
  std::vector<std::string> patient_ids;
  std::vector<std::vector<int>> votes;
  std::vector<int> predicted;
};
PredictionTable read_predictions(const std::filesystem::path& path);

}  // namespace lungbeam
