#include "dpgt/defect_predictor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dpgt/csv.hpp"
#include "dpgt/error.hpp"

namespace dpgt {

void SchwaParams::validate() const {
  for (double w : {w_r, w_f, w_a})
    if (!(w >= 0.0)) throw Error(ErrorCode::InvalidConfig, "schwa weights must be >= 0");
  if (std::abs(w_r + w_f + w_a - 1.0) > 1e-12)
    throw Error(ErrorCode::InvalidConfig, "schwa weights must sum to 1");
  if (!(time_range >= 0.0 && time_range <= 1.0))
    throw Error(ErrorCode::InvalidConfig, "schwa.time_range must lie in [0,1]");
}

TimeNormalization normalization_for(const HistoryMap& histories) {
  EpochSeconds lo = std::numeric_limits<EpochSeconds>::max();
  EpochSeconds hi = std::numeric_limits<EpochSeconds>::min();
  for (const auto& [_, h] : histories) {
    for (const auto* series : {&h.revisions, &h.fixes, &h.new_author_commits}) {
      if (series->empty()) continue;
      lo = std::min(lo, series->front());
      hi = std::max(hi, series->back());
    }
  }
  if (lo > hi) return {};
  return {lo, hi};
}

TimeNormalization normalization_for(const std::vector<CommitRecord>& commits) {
  if (commits.empty()) return {};
  auto [lo, hi] = std::minmax_element(
      commits.begin(), commits.end(),
      [](const CommitRecord& a, const CommitRecord& b) { return a.timestamp < b.timestamp; });
  return {lo->timestamp, hi->timestamp};
}

double normalize_timestamp(EpochSeconds t, const TimeNormalization& norm) {
  if (norm.t_oldest > norm.t_latest || t < norm.t_oldest || t > norm.t_latest)
    throw Error(ErrorCode::TimestampOutOfRange,
                "timestamp " + std::to_string(t) + " outside [" + std::to_string(norm.t_oldest) +
                    ", " + std::to_string(norm.t_latest) + "]");
  if (norm.t_latest == norm.t_oldest) return 1.0;
  return static_cast<double>(t - norm.t_oldest) /
         static_cast<double>(norm.t_latest - norm.t_oldest);
}

double twr(double t_normalized, double time_range) {
  return 1.0 / (1.0 + std::exp(-12.0 * t_normalized + 2.0 + (1.0 - time_range) * 10.0));
}

double defect_probability(double score) { return -std::expm1(-score); }

DefectScore score_from_sums(std::string component_id, const TwrSums& sums,
                            const SchwaParams& params) {
  DefectScore out;
  out.component_id = std::move(component_id);
  out.twr_sums = sums;
  out.score = params.w_r * sums.revisions + params.w_f * sums.fixes + params.w_a * sums.authors;
  out.probability = defect_probability(out.score);
  return out;
}

DefectScore score_component(const ComponentHistory& history, const SchwaParams& params,
                            const TimeNormalization& norm) {
  auto sum = [&](const std::vector<EpochSeconds>& series) {
    double total = 0.0;
    for (EpochSeconds t : series) total += twr(normalize_timestamp(t, norm), params.time_range);
    return total;
  };
  TwrSums sums{sum(history.revisions), sum(history.fixes), sum(history.new_author_commits)};
  return score_from_sums(history.component_id, sums, params);
}

void sort_scores(std::vector<DefectScore>& scores) {
  std::sort(scores.begin(), scores.end(), [](const DefectScore& a, const DefectScore& b) {
    if (a.probability != b.probability) return a.probability > b.probability;
    return a.component_id < b.component_id;
  });
}

Prediction predict_project(const HistoryMap& histories, const SchwaParams& params,
                           std::optional<TimeNormalization> norm,
                           std::optional<std::chrono::steady_clock::time_point> started) {
  const auto start = started.value_or(std::chrono::steady_clock::now());
  if (histories.empty()) throw Error(ErrorCode::EmptyProject, "no components to score");
  params.validate();
  const TimeNormalization window = norm.value_or(normalization_for(histories));

  Prediction out;
  out.scores.reserve(histories.size());
  for (const auto& [id, h] : histories) {
    auto s = score_component(h, params, window);
    s.component_id = id;
    out.scores.push_back(std::move(s));
  }
  sort_scores(out.scores);
  out.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

double round_up_seconds(double seconds) { return std::ceil(seconds); }

void write_scores_csv(std::ostream& out, const std::vector<DefectScore>& scores) {
  out << "component,score,probability,twr_revisions,twr_fixes,twr_authors\n";
  for (const auto& s : scores) {
    out << csv::join({s.component_id, csv::fixed(s.score, 9), csv::fixed(s.probability, 6),
                      csv::fixed(s.twr_sums.revisions, 9), csv::fixed(s.twr_sums.fixes, 9),
                      csv::fixed(s.twr_sums.authors, 9)})
        << '\n';
  }
}

std::vector<DefectScore> read_scores_csv(std::istream& in) {
  auto rows = csv::parse(in);
  const csv::Row header{"component",     "score",     "probability",
                        "twr_revisions", "twr_fixes", "twr_authors"};
  if (rows.empty() || rows.front() != header)
    throw Error(ErrorCode::InvalidInput, "scores.csv: missing or unexpected header");
  std::vector<DefectScore> scores;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() != header.size())
      throw Error(ErrorCode::InvalidInput,
                  "scores.csv: row " + std::to_string(i + 1) + " has wrong column count");
    DefectScore s;
    s.component_id = row[0];
    s.score = csv::to_double(row[1], "score");
    s.probability = csv::to_double(row[2], "probability");
    s.twr_sums = {csv::to_double(row[3], "twr_revisions"), csv::to_double(row[4], "twr_fixes"),
                  csv::to_double(row[5], "twr_authors")};
    if (s.probability < 0.0 || s.probability > 1.0)
      throw Error(ErrorCode::InvalidInput, "scores.csv: probability outside [0,1]");
    scores.push_back(std::move(s));
  }
  return scores;
}

}  // namespace dpgt
