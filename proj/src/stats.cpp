#include "ljw/stats.hpp"

#include <cmath>
#include <limits>

namespace ljw {

double compensated_sum(std::span<const double> values) {
  double sum = 0.0;
  double comp = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

Summary summarize(std::span<const double> values) {
  Summary s;
  const std::size_t n = values.size();
  if (n == 0) return s;
  s.mean = compensated_sum(values) / static_cast<double>(n);
  if (n < 2) return s;
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = values[i] - s.mean;
    sq[i] = d * d;
  }
  const double var = compensated_sum(sq) / static_cast<double>(n - 1);
  s.std_error = std::sqrt(var / static_cast<double>(n));
  return s;
}

double z_score(double mean, double std_error) {
  if (std_error > 0.0) return std::abs(mean) / std_error;
  return mean == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

EstimatorResult paired_estimate(std::span<const SamplePair> samples) {
  const std::size_t n = samples.size();
  std::vector<double> lhs(n), rhs(n), diff(n);
  for (std::size_t i = 0; i < n; ++i) {
    lhs[i] = samples[i].lhs;
    rhs[i] = samples[i].rhs;
    diff[i] = samples[i].lhs - samples[i].rhs;
  }
  EstimatorResult r;
  r.count = n;
  r.lhs = summarize(lhs);
  r.rhs = summarize(rhs);
  const Summary d = summarize(diff);
  r.paired.mean = d.mean;
  r.paired.std_error = d.std_error;
  r.paired.z = z_score(d.mean, d.std_error);
  return r;
}

}  // namespace ljw
