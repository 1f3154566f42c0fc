#include "toolgate/stats.hpp"

#include "toolgate/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace toolgate {

double mean(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

Interval bootstrap_ci(const std::vector<double>& samples, int replicates, std::uint64_t seed, double level) {
  if (samples.empty()) throw std::invalid_argument("bootstrap of empty samples");
  if (replicates <= 0) throw std::invalid_argument("replicates must be positive");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must be in (0, 1)");
  Rng rng(make_stream(seed, std::string_view("bootstrap")));
  const std::size_t n = samples.size();
  std::vector<double> means(static_cast<std::size_t>(replicates));
  for (auto& m : means) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += samples[rng.below(n)];
    m = sum / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  const double alpha = 1.0 - level;
  const auto b = static_cast<double>(replicates);
  auto lo_idx = static_cast<std::size_t>(std::floor(alpha / 2.0 * b));
  auto hi_idx = static_cast<std::size_t>(std::ceil((1.0 - alpha / 2.0) * b));
  hi_idx = hi_idx == 0 ? 0 : hi_idx - 1;
  lo_idx = std::min(lo_idx, means.size() - 1);
  hi_idx = std::min(hi_idx, means.size() - 1);
  return {means[lo_idx], means[hi_idx]};
}

double binomial_half_cdf(int k, int n) {
  if (k < 0) return 0.0;
  if (k >= n) return 1.0;
  // Sum of C(n, i) / 2^n in log space to stay finite for large n.
  double total = 0.0;
  for (int i = 0; i <= k; ++i) {
    const double log_term = std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) - n * std::log(2.0);
    total += std::exp(log_term);
  }
  return std::min(1.0, total);
}

SignTest sign_test_from_differences(const std::vector<double>& differences) {
  SignTest t;
  for (double d : differences) {
    if (d > 0) {
      ++t.positive;
    } else if (d < 0) {
      ++t.negative;
    } else {
      ++t.ties;
    }
  }
  const int n = t.positive + t.negative;
  if (n == 0) return t;
  t.p_value = std::min(1.0, 2.0 * binomial_half_cdf(std::min(t.positive, t.negative), n));
  return t;
}

SignTest paired_sign_test(const std::vector<std::pair<double, double>>& pairs) {
  std::vector<double> diffs;
  diffs.reserve(pairs.size());
  for (const auto& [a, b] : pairs) diffs.push_back(b - a);
  return sign_test_from_differences(diffs);
}

double nearest_rank(std::vector<double> values, double p) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

}  // namespace toolgate
