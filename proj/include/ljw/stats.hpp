#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ljw {

struct Summary {
  double mean = 0.0;
  double std_error = 0.0;
};

struct PairedSummary {
  double mean = 0.0;
  double std_error = 0.0;
  /// |mean| / stderr; 0 when both vanish, +inf when only stderr does.
  double z = 0.0;
};

/// Per-sample values of the two sides of an identity.
struct SamplePair {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Paired Monte Carlo estimate of E[lhs] - E[rhs] with common random numbers.
struct EstimatorResult {
  Summary lhs;
  Summary rhs;
  PairedSummary paired;
  std::size_t count = 0;
};

/// Mean and standard error (sample sd / sqrt(n)); Neumaier-compensated sums
/// in index order.
Summary summarize(std::span<const double> values);

double z_score(double mean, double std_error);

EstimatorResult paired_estimate(std::span<const SamplePair> samples);

/// Neumaier-compensated sum.
double compensated_sum(std::span<const double> values);

}  // namespace ljw
