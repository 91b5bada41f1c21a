#pragma once

// Schwa-style defect scoring: time-weighted risk per timestamp, a weighted
// sum over the Revisions / Fixes / Authors series, and 1 - exp(-score).

#include <chrono>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dpgt/history_miner.hpp"

namespace dpgt {

struct SchwaParams {
  double w_r = 0.25;
  double w_f = 0.5;
  double w_a = 0.25;
  double time_range = 0.4;

  /// Weights non-negative summing to 1 (1e-12), time_range in [0,1].
  void validate() const;
};

struct TwrSums {
  double revisions = 0.0;
  double fixes = 0.0;
  double authors = 0.0;
};

struct DefectScore {
  std::string component_id;
  double score = 0.0;
  double probability = 0.0;
  TwrSums twr_sums;
};

struct TimeNormalization {
  EpochSeconds t_oldest = 0;
  EpochSeconds t_latest = 0;
};

/// Window spanned by every timestamp in `histories`.
TimeNormalization normalization_for(const HistoryMap& histories);
TimeNormalization normalization_for(const std::vector<CommitRecord>& commits);

/// Maps t into [0,1] over the window. A zero-width window maps to 1.
double normalize_timestamp(EpochSeconds t, const TimeNormalization& norm);

/// Logistic time-weighted risk of a normalized timestamp.
double twr(double t_normalized, double time_range);

double defect_probability(double score);

DefectScore score_from_sums(std::string component_id, const TwrSums& sums,
                            const SchwaParams& params);

DefectScore score_component(const ComponentHistory& history, const SchwaParams& params,
                            const TimeNormalization& norm);

struct Prediction {
  std::vector<DefectScore> scores;  // probability desc, then component_id asc
  double elapsed_seconds = 0.0;     // T_DP, unrounded
};

/// Scores every component. elapsed_seconds runs from `started` (defaults to
/// entry into this call) until scoring finishes; pass the time mining began
/// to obtain the full defect-prediction overhead.
Prediction predict_project(const HistoryMap& histories, const SchwaParams& params,
                           std::optional<TimeNormalization> norm = std::nullopt,
                           std::optional<std::chrono::steady_clock::time_point> started =
                               std::nullopt);

/// The allocator consumes T_DP in whole seconds, rounded up.
double round_up_seconds(double seconds);

void sort_scores(std::vector<DefectScore>& scores);

void write_scores_csv(std::ostream& out, const std::vector<DefectScore>& scores);
std::vector<DefectScore> read_scores_csv(std::istream& in);

}  // namespace dpgt
