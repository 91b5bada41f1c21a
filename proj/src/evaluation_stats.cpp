#include "dpgt/evaluation_stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>

#include "dpgt/error.hpp"

namespace dpgt {

namespace {

void require_samples(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) throw Error(ErrorCode::EmptySample, "both samples must be non-empty");
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(x.begin(), x.end(), finite) || !std::all_of(y.begin(), y.end(), finite))
    throw Error(ErrorCode::InvalidInput, "samples must be finite");
}

// Pooled mid-ranks scaled by two so tied ranks stay integral. Entries
// [0, n1) belong to x, the rest to y.
struct PooledRanks {
  std::vector<long long> doubled;
  std::vector<std::size_t> tie_sizes;
};

PooledRanks pooled_ranks(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size() + y.size();
  std::vector<std::pair<double, std::size_t>> pooled;
  pooled.reserve(n);
  for (std::size_t i = 0; i < x.size(); ++i) pooled.emplace_back(x[i], i);
  for (std::size_t i = 0; i < y.size(); ++i) pooled.emplace_back(y[i], x.size() + i);
  std::sort(pooled.begin(), pooled.end());

  PooledRanks out;
  out.doubled.resize(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && pooled[j + 1].first == pooled[i].first) ++j;
    // positions i..j (0-based) share mid-rank ((i+1)+(j+1))/2
    const auto doubled = static_cast<long long>(i + j + 2);
    for (std::size_t k = i; k <= j; ++k) out.doubled[pooled[k].second] = doubled;
    out.tie_sizes.push_back(j - i + 1);
    i = j + 1;
  }
  return out;
}

// 2 * U for the first sample: twice the x rank sum minus n1(n1+1).
long long doubled_u(const PooledRanks& ranks, std::size_t n1) {
  long long s = 0;
  for (std::size_t i = 0; i < n1; ++i) s += ranks.doubled[i];
  return s - static_cast<long long>(n1 * (n1 + 1));
}

}  // namespace

DetectionMatrix::DetectionMatrix(std::string strategy_id, std::size_t runs, std::size_t bugs)
    : strategy_id_(std::move(strategy_id)), runs_(runs), bugs_(bugs), cells_(runs * bugs, 0) {}

DetectionMatrix::DetectionMatrix(std::string strategy_id,
                                 const std::vector<std::vector<bool>>& rows)
    : strategy_id_(std::move(strategy_id)),
      runs_(rows.size()),
      bugs_(rows.empty() ? 0 : rows.front().size()) {
  cells_.reserve(runs_ * bugs_);
  for (const auto& row : rows) {
    if (row.size() != bugs_)
      throw Error(ErrorCode::ShapeMismatch, "detection matrix rows differ in length");
    for (bool v : row) cells_.push_back(v ? 1 : 0);
  }
}

double success_rate(const DetectionMatrix& matrix, std::size_t bug) {
  if (bug >= matrix.bugs())
    throw Error(ErrorCode::IndexOutOfRange, "bug index " + std::to_string(bug) + " out of range");
  if (matrix.runs() == 0) return 0.0;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < matrix.runs(); ++r) hits += matrix.detected(r, bug) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(matrix.runs());
}

std::pair<std::set<std::size_t>, std::set<std::size_t>> unique_bugs(const DetectionMatrix& a,
                                                                     const DetectionMatrix& b) {
  if (a.bugs() != b.bugs())
    throw Error(ErrorCode::ShapeMismatch, "matrices cover different bug counts");
  auto ever = [](const DetectionMatrix& m, std::size_t bug) {
    for (std::size_t r = 0; r < m.runs(); ++r)
      if (m.detected(r, bug)) return true;
    return false;
  };
  std::pair<std::set<std::size_t>, std::set<std::size_t>> out;
  for (std::size_t bug = 0; bug < a.bugs(); ++bug) {
    const bool in_a = ever(a, bug);
    const bool in_b = ever(b, bug);
    if (in_a && !in_b) out.first.insert(bug);
    if (in_b && !in_a) out.second.insert(bug);
  }
  return out;
}

std::vector<int> bugs_found_per_run(const DetectionMatrix& matrix) {
  std::vector<int> out(matrix.runs(), 0);
  for (std::size_t r = 0; r < matrix.runs(); ++r)
    for (std::size_t b = 0; b < matrix.bugs(); ++b) out[r] += matrix.detected(r, b) ? 1 : 0;
  return out;
}

double vargha_delaney_a12(std::span<const double> x, std::span<const double> y) {
  require_samples(x, y);
  const auto ranks = pooled_ranks(x, y);
  // 2U = 2 #(x>y) + #(x=y), so this is exactly (#gt + 0.5 #eq) / (n1 n2).
  const long long twice_u = doubled_u(ranks, x.size());
  return static_cast<double>(twice_u) / static_cast<double>(2 * x.size() * y.size());
}

double mann_whitney_exact_p(std::span<const double> x, std::span<const double> y) {
  require_samples(x, y);
  const std::size_t n1 = x.size();
  const std::size_t n = n1 + y.size();
  if (n > 60)
    throw Error(ErrorCode::InvalidInput, "exact U test supports at most 60 observations");
  const auto ranks = pooled_ranks(x, y);

  // ways[k][s]: number of k-subsets of the pooled observations whose doubled
  // ranks sum to s.
  const long long max_sum = std::accumulate(ranks.doubled.begin(), ranks.doubled.end(), 0LL);
  std::vector<std::vector<std::uint64_t>> ways(
      n1 + 1, std::vector<std::uint64_t>(static_cast<std::size_t>(max_sum) + 1, 0));
  ways[0][0] = 1;
  for (std::size_t item = 0; item < n; ++item) {
    const auto r = static_cast<std::size_t>(ranks.doubled[item]);
    for (std::size_t k = std::min(n1, item + 1); k >= 1; --k)
      for (std::size_t s = static_cast<std::size_t>(max_sum); s >= r; --s)
        ways[k][s] += ways[k - 1][s - r];
  }

  const long long centre = static_cast<long long>(n1 * (n + 1));  // E[2 * rank sum]
  long long observed = 0;
  for (std::size_t i = 0; i < n1; ++i) observed += ranks.doubled[i];
  const long long observed_dev = std::llabs(observed - centre);

  std::uint64_t extreme = 0;
  std::uint64_t total = 0;
  for (std::size_t s = 0; s < ways[n1].size(); ++s) {
    total += ways[n1][s];
    if (std::llabs(static_cast<long long>(s) - centre) >= observed_dev) extreme += ways[n1][s];
  }
  return static_cast<double>(extreme) / static_cast<double>(total);
}

double mann_whitney_normal_p(std::span<const double> x, std::span<const double> y) {
  require_samples(x, y);
  const double n1 = static_cast<double>(x.size());
  const double n2 = static_cast<double>(y.size());
  const double n = n1 + n2;
  const auto ranks = pooled_ranks(x, y);
  const double u = static_cast<double>(doubled_u(ranks, x.size())) / 2.0;

  double tie_term = 0.0;
  for (std::size_t t : ranks.tie_sizes) {
    const double tt = static_cast<double>(t);
    tie_term += tt * tt * tt - tt;
  }
  const double variance = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
  if (!(variance > 0.0)) return 1.0;

  const double deviation = std::max(0.0, std::abs(u - n1 * n2 / 2.0) - 0.5);
  const double z = deviation / std::sqrt(variance);
  const double p = std::erfc(z / std::sqrt(2.0));
  return std::clamp(p, std::numeric_limits<double>::min(), 1.0);
}

EffectSizeResult mann_whitney_u_two_tailed(std::span<const double> x, std::span<const double> y) {
  require_samples(x, y);
  EffectSizeResult out;
  out.n1 = x.size();
  out.n2 = y.size();
  const auto ranks = pooled_ranks(x, y);
  const long long twice_u = doubled_u(ranks, x.size());
  out.u_statistic = static_cast<double>(twice_u) / 2.0;
  out.a12 = static_cast<double>(twice_u) / static_cast<double>(2 * x.size() * y.size());

  if (ranks.tie_sizes.size() == 1) {
    out.degenerate_variance = true;
    out.p_value_two_tailed = 1.0;
    out.method = out.n1 + out.n2 <= kExactUTestMaxN ? PValueMethod::Exact
                                                    : PValueMethod::NormalApproximation;
    return out;
  }
  if (out.n1 + out.n2 <= kExactUTestMaxN) {
    out.method = PValueMethod::Exact;
    out.p_value_two_tailed = mann_whitney_exact_p(x, y);
  } else {
    out.method = PValueMethod::NormalApproximation;
    out.p_value_two_tailed = mann_whitney_normal_p(x, y);
  }
  return out;
}

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double median(std::span<const double> values) {
  if (values.empty()) return 0.0;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  if (sorted.size() % 2 == 1) return sorted[mid];
  return (sorted[mid - 1] + sorted[mid]) / 2.0;
}

}  // namespace dpgt
