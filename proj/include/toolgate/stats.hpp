#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace toolgate {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Percentile bootstrap of the mean. Throws std::invalid_argument on empty
// samples.
Interval bootstrap_ci(const std::vector<double>& samples, int replicates = 10000, std::uint64_t seed = 0,
                      double level = 0.95);

struct SignTest {
  int positive = 0;
  int negative = 0;
  int ties = 0;
  std::optional<double> p_value;  // nullopt when every pair ties
};

// Two-sided exact sign test over differences b − a of aligned pairs.
SignTest paired_sign_test(const std::vector<std::pair<double, double>>& pairs);
SignTest sign_test_from_differences(const std::vector<double>& differences);

// P(X <= k) for X ~ Binomial(n, 1/2).
double binomial_half_cdf(int k, int n);

double mean(const std::vector<double>& xs);

// Nearest-rank percentile (p in (0, 100]) of unsorted values; 0 when empty.
double nearest_rank(std::vector<double> values, double p);

}  // namespace toolgate
