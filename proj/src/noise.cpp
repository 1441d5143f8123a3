#include "ljw/noise.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "ljw/errors.hpp"

namespace ljw {

int TimeGrid::index_of(double t) const {
  const double pos = t / dt();
  const double rounded = std::round(pos);
  if (std::abs(pos - rounded) > 1e-9 * std::max(1.0, std::abs(pos)) || rounded < 0 ||
      rounded > steps) {
    std::ostringstream msg;
    msg << "time " << t << " is not on the grid (T=" << horizon << ", L=" << steps << ")";
    throw GridError(msg.str());
  }
  return static_cast<int>(rounded);
}

TimeGrid TimeGrid::coarsened(int factor) const {
  if (factor < 1 || steps % factor != 0) throw GridError("coarsening factor must divide the step count");
  return TimeGrid{horizon, steps / factor};
}

DrivingNoise DrivingNoise::coarsened(int factor) const {
  DrivingNoise out;
  out.grid = grid.coarsened(factor);
  out.dim = dim;
  out.seed = seed;
  out.index = index;
  out.increments.reserve(out.grid.steps);
  for (int k = 0; k < out.grid.steps; ++k) {
    Vec sum = zeros(dim);
    for (int j = 0; j < factor; ++j) sum += increments[k * factor + j];
    out.increments.push_back(sum);
  }
  return out;
}

Vec DrivingNoise::value(int k) const {
  Vec b = zeros(dim);
  for (int j = 0; j < k; ++j) b += increments[j];
  return b;
}

DrivingNoise sample_noise(const TimeGrid& grid, int dim, std::uint64_t seed, std::uint64_t index) {
  if (grid.steps < 1 || !(grid.horizon > 0.0)) {
    throw std::invalid_argument("sample_noise: need at least one step and a positive horizon");
  }
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    0x6c6a77u};
  std::mt19937_64 engine(seq);
  std::normal_distribution<double> normal(0.0, std::sqrt(grid.dt()));
  DrivingNoise out;
  out.grid = grid;
  out.dim = dim;
  out.seed = seed;
  out.index = index;
  out.increments.reserve(grid.steps);
  for (int k = 0; k < grid.steps; ++k) {
    Vec db(dim);
    for (int i = 0; i < dim; ++i) db[i] = normal(engine);
    out.increments.push_back(db);
  }
  return out;
}

CameronMartinPath::CameronMartinPath(TimeGrid grid, std::vector<Vec> rates)
    : grid_(grid), rates_(std::move(rates)) {
  if (static_cast<int>(rates_.size()) != grid_.steps) {
    throw GridError("CameronMartinPath: one rate per grid step is required");
  }
}

CameronMartinPath CameronMartinPath::linear(const TimeGrid& grid, const Vec& direction) {
  return CameronMartinPath(grid, std::vector<Vec>(grid.steps, direction));
}

CameronMartinPath CameronMartinPath::zero(const TimeGrid& grid, int dim) {
  return CameronMartinPath(grid, std::vector<Vec>(grid.steps, zeros(dim)));
}

Vec CameronMartinPath::value(int k) const {
  Vec v = zeros(dim());
  for (int j = 0; j < k; ++j) v += increment(j);
  return v;
}

double CameronMartinPath::energy() const {
  double e = 0.0;
  for (const Vec& r : rates_) e += r.squaredNorm();
  return e * grid_.dt();
}

CameronMartinPath CameronMartinPath::scaled(double alpha) const {
  std::vector<Vec> r;
  r.reserve(rates_.size());
  for (const Vec& v : rates_) r.push_back(alpha * v);
  return CameronMartinPath(grid_, std::move(r));
}

CameronMartinPath CameronMartinPath::coarsened(int factor) const {
  const TimeGrid g = grid_.coarsened(factor);
  std::vector<Vec> r;
  r.reserve(g.steps);
  for (int k = 0; k < g.steps; ++k) {
    Vec sum = zeros(dim());
    for (int j = 0; j < factor; ++j) sum += rates_[k * factor + j];
    r.push_back(sum / factor);
  }
  return CameronMartinPath(g, std::move(r));
}

DrivingNoise shifted_noise(const DrivingNoise& noise, const CameronMartinPath& k, double tau) {
  if (k.grid().steps != noise.grid.steps) throw GridError("shifted_noise: grids differ");
  DrivingNoise out = noise;
  if (tau == 0.0) return out;
  for (int j = 0; j < noise.grid.steps; ++j) out.increments[j] += tau * k.increment(j);
  return out;
}

}  // namespace ljw
