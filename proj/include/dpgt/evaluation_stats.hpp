#pragma once

// Statistics for comparing test generation strategies: per-bug success
// rates, unique bugs, Vargha-Delaney A12 and a two-tailed Mann-Whitney U test.

#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dpgt {

/// runs x bugs detection outcomes of one strategy.
class DetectionMatrix {
 public:
  DetectionMatrix() = default;
  DetectionMatrix(std::string strategy_id, std::size_t runs, std::size_t bugs);
  /// Throws ShapeMismatch on ragged rows.
  DetectionMatrix(std::string strategy_id, const std::vector<std::vector<bool>>& rows);

  const std::string& strategy_id() const noexcept { return strategy_id_; }
  std::size_t runs() const noexcept { return runs_; }
  std::size_t bugs() const noexcept { return bugs_; }

  bool detected(std::size_t run, std::size_t bug) const { return cells_[run * bugs_ + bug] != 0; }
  void set(std::size_t run, std::size_t bug, bool value) {
    cells_[run * bugs_ + bug] = value ? 1 : 0;
  }

  bool operator==(const DetectionMatrix&) const = default;

 private:
  std::string strategy_id_;
  std::size_t runs_ = 0;
  std::size_t bugs_ = 0;
  std::vector<std::uint8_t> cells_;
};

double success_rate(const DetectionMatrix& matrix, std::size_t bug);

/// Bugs found by a in some run and never by b, and vice versa.
std::pair<std::set<std::size_t>, std::set<std::size_t>> unique_bugs(const DetectionMatrix& a,
                                                                     const DetectionMatrix& b);

std::vector<int> bugs_found_per_run(const DetectionMatrix& matrix);

/// P(X > Y) + 0.5 P(X = Y).
double vargha_delaney_a12(std::span<const double> x, std::span<const double> y);

enum class PValueMethod { Exact, NormalApproximation };

struct EffectSizeResult {
  double a12 = 0.5;
  double u_statistic = 0.0;  // U of the first sample
  double p_value_two_tailed = 1.0;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  PValueMethod method = PValueMethod::Exact;
  bool degenerate_variance = false;  // every observation identical; p fixed at 1
};

/// Combined sample sizes at or below this use the exact permutation
/// distribution.
inline constexpr std::size_t kExactUTestMaxN = 12;

EffectSizeResult mann_whitney_u_two_tailed(std::span<const double> x, std::span<const double> y);

/// Exact two-tailed p-value over all C(n1+n2, n1) assignments of the pooled
/// mid-ranks. Ties are allowed.
double mann_whitney_exact_p(std::span<const double> x, std::span<const double> y);

/// Normal approximation with tie-corrected variance and continuity correction.
double mann_whitney_normal_p(std::span<const double> x, std::span<const double> y);

double mean(std::span<const double> values);
double median(std::span<const double> values);

}  // namespace dpgt
