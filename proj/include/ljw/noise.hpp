#pragma once

#include <cstdint>
#include <vector>

#include "ljw/types.hpp"

namespace ljw {

/// Uniform time grid t_k = k T / L on [0, T].
struct TimeGrid {
  double horizon = 1.0;
  int steps = 1024;

  double dt() const { return horizon / steps; }
  double time(int k) const { return horizon * k / steps; }
  /// Index of t on the grid; throws GridError when t is not a grid time.
  int index_of(double t) const;
  TimeGrid coarsened(int factor) const;
};

/// Brownian increments dB_k ~ N(0, dt I_m) for k = 0..L-1.
struct DrivingNoise {
  TimeGrid grid;
  int dim = 0;
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
  std::vector<Vec> increments;

  /// Same Brownian path on a grid `factor` times coarser (sums of
  /// consecutive increments).
  DrivingNoise coarsened(int factor) const;
  /// B at grid time k.
  Vec value(int k) const;
};

/// The increment stream is a pure function of (seed, index): the two are
/// mixed into a std::seed_seq that seeds a private 64-bit Mersenne Twister.
DrivingNoise sample_noise(const TimeGrid& grid, int dim, std::uint64_t seed, std::uint64_t index);

/// Piecewise-linear Cameron-Martin path k with k(0) = 0, represented by its
/// constant rate on each grid step.
class CameronMartinPath {
 public:
  CameronMartinPath() = default;
  CameronMartinPath(TimeGrid grid, std::vector<Vec> rates);

  /// k(t) = t * direction.
  static CameronMartinPath linear(const TimeGrid& grid, const Vec& direction);
  /// k = 0 in R^dim.
  static CameronMartinPath zero(const TimeGrid& grid, int dim);
  /// Interpolates a function with fn(0) = 0 at the grid times.
  template <class Fn>
  static CameronMartinPath interpolate(const TimeGrid& grid, Fn&& fn) {
    std::vector<Vec> rates;
    rates.reserve(grid.steps);
    for (int k = 0; k < grid.steps; ++k) {
      rates.push_back((fn(grid.time(k + 1)) - fn(grid.time(k))) / grid.dt());
    }
    return CameronMartinPath(grid, std::move(rates));
  }

  const TimeGrid& grid() const { return grid_; }
  int dim() const { return rates_.empty() ? 0 : static_cast<int>(rates_.front().size()); }
  const Vec& rate(int k) const { return rates_[k]; }
  Vec increment(int k) const { return rates_[k] * grid_.dt(); }
  Vec value(int k) const;
  /// |k|_H^2 = sum_k |kdot_k|^2 dt.
  double energy() const;
  CameronMartinPath scaled(double alpha) const;
  CameronMartinPath coarsened(int factor) const;

 private:
  TimeGrid grid_;
  std::vector<Vec> rates_;
};

/// Noise with increments dB_k + tau * dk_k.
DrivingNoise shifted_noise(const DrivingNoise& noise, const CameronMartinPath& k, double tau);

}  // namespace ljw
