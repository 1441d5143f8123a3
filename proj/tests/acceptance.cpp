// Acceptance runs: one PASS/FAIL line per criterion. With no arguments every
// criterion runs; otherwise only the named ones.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#ifdef __GLIBC__
#include <malloc.h>
#endif

#include "ljw/harness.hpp"
#include "ljw/report.hpp"
#include "ljw/scenarios.hpp"

using namespace ljw;

namespace {

constexpr std::size_t kPaths = 100000;
constexpr int kSteps = 1024;

struct Outcome {
  bool pass = true;
  std::string details;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!details.empty()) details += "; ";
    details += (ok ? "" : "[x] ") + what;
  }
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

McConfig mc(std::size_t paths = kPaths, int steps = kSteps, double horizon = 1.0) {
  McConfig cfg;
  cfg.grid = TimeGrid{horizon, steps};
  cfg.paths = paths;
  return cfg;
}

CameronMartinPath kpath(const Scenario& s, const McConfig& cfg) {
  return CameronMartinPath::linear(cfg.grid, s.k_direction);
}

bool within(const Summary& s, double target, double allowance) {
  return std::abs(s.mean - target) <= 3.0 * s.std_error + allowance;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const CylindricalFunctional& functional(const Scenario& s, const std::string& name) {
  for (const auto& f : s.functionals)
    if (f.name == name) return f;
  throw std::invalid_argument("no functional " + name + " on " + s.id);
}

Outcome circle_closed_form() {
  Outcome o;
  const Scenario& s = find_scenario("circle-full");
  McConfig cfg = mc();
  cfg.workers = 1;
  const auto t0 = std::chrono::steady_clock::now();
  const HarnessResult r = estimate_eq4(*s.system, s.start, functional(s, "sin-end"), kpath(s, cfg), cfg);
  const double secs = seconds_since(t0);
  const double target = std::exp(-0.5);
  const EstimatorResult& e = r.estimate;
  o.require(within(e.lhs, target, 0.01), fmt("lhs %.5f", e.lhs.mean));
  o.require(within(e.rhs, target, 0.01), fmt("rhs %.5f", e.rhs.mean));
  o.require(e.paired.z < 3.0, fmt("z %.3f", e.paired.z));
  o.require(secs < 60.0, fmt("%.1f s", secs));
  return o;
}

Outcome filtered_matches_unfiltered_on_circle() {
  Outcome o;
  const Scenario& s = find_scenario("circle-full");
  const ConnectionOracle oracle(s.system);
  McConfig cfg = mc();
  cfg.keep_samples = true;
  const CameronMartinPath k = kpath(s, cfg);
  const CylindricalFunctional& f = functional(s, "sin-end");
  const HarnessResult a = estimate_eq4(*s.system, s.start, f, k, cfg);
  const HarnessResult b = estimate_eq9(oracle, s.start, f, k, cfg);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    worst = std::max({worst, std::abs(a.samples[i].lhs - b.samples[i].lhs),
                      std::abs(a.samples[i].rhs - b.samples[i].rhs)});
  }
  o.require(a.samples.size() == kPaths && b.samples.size() == kPaths, "100000 samples");
  o.require(worst <= 1e-10, fmt("max per-sample gap %.2e", worst));
  return o;
}

Outcome filtered_identity() {
  Outcome o;
  for (const char* id : {"sphere2-gradient", "torus2-degenerate"}) {
    const Scenario& s = find_scenario(id);
    const ConnectionOracle oracle(s.system);
    McConfig cfg = mc();
    cfg.keep_samples = true;
    const auto results = estimate_eq9(oracle, s.start, std::span<const CylindricalFunctional>(s.functionals),
                                      kpath(s, cfg), cfg);
    int passed = 0;
    for (std::size_t n = 0; n < results.size(); ++n) {
      const CylindricalFunctional& f = s.functionals[n];
      const HarnessResult& r = results[n];
      bool ok;
      if (f.name == "sin-transverse-end") {
        bool zero = true;
        for (const SamplePair& p : r.samples) zero = zero && p.lhs == 0.0;
        ok = zero && within(r.estimate.rhs, 0.0, 0.0);
        o.require(ok, std::string(id) + " " + f.name + ": lhs exactly 0, " +
                          fmt("rhs %.4f +- %.4f", r.estimate.rhs.mean, r.estimate.rhs.std_error));
      } else {
        ok = r.estimate.paired.z < 3.0;
        o.require(ok, std::string(id) + " " + f.name + fmt(" z %.3f", r.estimate.paired.z));
      }
      passed += ok ? 1 : 0;
    }
    o.require(passed >= 3, std::string(id) + ": " + std::to_string(passed) + " functionals");
  }
  return o;
}

Outcome multipoint_identity() {
  Outcome o;
  const Scenario& s = find_scenario("sphere2-gradient");
  McConfig cfg = mc();
  const CameronMartinPath k = kpath(s, cfg);
  const HarnessResult two = estimate_eq5_multipoint(*s.system, s.multipoint_bases, s.multipoint, k, cfg);
  o.require(s.multipoint.points == 2, "q = 2");
  o.require(two.estimate.paired.z < 3.0, fmt("z %.3f", two.estimate.paired.z));

  McConfig small = mc(2000);
  small.keep_samples = true;
  const CylindricalFunctional& f = s.functionals.front();
  const HarnessResult a = estimate_eq4(*s.system, s.start, f, k, small);
  const HarnessResult b = estimate_eq5_multipoint(*s.system, std::span<const Vec>(&s.start, 1), f, k, small);
  bool same = a.samples.size() == b.samples.size();
  for (std::size_t i = 0; same && i < a.samples.size(); ++i) {
    same = a.samples[i].lhs == b.samples[i].lhs && a.samples[i].rhs == b.samples[i].rhs;
  }
  o.require(same, "q = 1 bit-identical over 2000 samples");
  return o;
}

Outcome filtering_consistency_criterion() {
  Outcome o;
  const Scenario& s = find_scenario("sphere2-gradient");
  const ConnectionOracle oracle(s.system);
  McConfig cfg = mc();
  const HarnessResult r = ljw::filtering_consistency(oracle, s.start, s.functionals.front(), kpath(s, cfg), cfg);
  o.require(r.estimate.paired.z < 3.0, fmt("left sides z %.3f", r.estimate.paired.z));
  for (double t : {0.25, 1.0}) {
    const McConfig ct = mc(kPaths, static_cast<int>(t * kSteps), t);
    const HarnessResult c = conditional_flow_check(oracle, s.start, s.tangent, [](const Vec&) { return 1.0; },
                                                   s.test_field, t, ct);
    o.require(c.estimate.paired.z < 3.0, fmt("conditional t=%.2f z %.3f", t, c.estimate.paired.z));
  }
  return o;
}

// Max over the path of | |W_t v0| - exp(-t/2) |v0| |.
double decay_error(const FilteredFlow& w, const Vec& v0, const TimeGrid& g) {
  double worst = 0.0;
  for (int k = 0; k <= g.steps; ++k) {
    worst = std::max(worst, std::abs((w.maps[k] * v0).norm() - std::exp(-0.5 * g.time(k)) * v0.norm()));
  }
  return worst;
}

Outcome sphere_filtered_decay() {
  Outcome o;
  constexpr double C = 2.0;
  const TimeGrid fine{1.0, 2 * kSteps};
  const TimeGrid coarse{1.0, kSteps};
  {
    const Scenario& s = find_scenario("sphere2-gradient");
    const ConnectionOracle oracle(s.system);
    const DiffusionSystem& sys = *s.system;
    double sum_coarse = 0.0, sum_fine = 0.0, worst_coarse = 0.0, worst_fine = 0.0;
    for (std::uint64_t i = 0; i < 100; ++i) {
      const DrivingNoise nf = sample_noise(fine, 3, 42, i);
      const DrivingNoise nc = nf.coarsened(2);
      auto error = [&](const DrivingNoise& n) {
        const FlowPath p = integrate_flow(sys, s.start, n, FlowOptions{false, false});
        const auto incr = antidevelopment_increments(sys, p, n);
        const FilteredFlow w = filtered_derivative_flow(oracle, p, incr, FilterVariant::LeviCivita,
                                                        FilterOptions{false, Mat(s.tangent)});
        return decay_error(w, Vec::Unit(1, 0), n.grid);
      };
      const double ec = error(nc), ef = error(nf);
      sum_coarse += ec;
      sum_fine += ef;
      worst_coarse = std::max(worst_coarse, ec);
      worst_fine = std::max(worst_fine, ef);
    }
    const double ratio = sum_coarse / sum_fine;
    o.require(worst_coarse <= C * coarse.dt(), fmt("max err %.2e at dt=1/1024 (C dt = %.2e)", worst_coarse, C * coarse.dt()));
    o.require(worst_fine <= C * fine.dt(), fmt("max err %.2e at dt=1/2048", worst_fine));
    o.require(ratio >= 1.5 && ratio <= 3.0, fmt("halving ratio %.3f", ratio));
  }
  for (const char* id : {"sphere2-gradient", "sphere2-drift"}) {
    const Scenario& s = find_scenario(id);
    const ConnectionOracle oracle(s.system);
    const DiffusionSystem& sys = *s.system;
    double worst = 0.0;
    for (std::uint64_t i = 0; i < 100; ++i) {
      const DrivingNoise n = sample_noise(coarse, 3, 42, i);
      const FlowPath p = integrate_flow(sys, s.start, n, FlowOptions{false, false});
      const auto incr = antidevelopment_increments(sys, p, n);
      const FilterOptions opts{false, Mat(s.tangent)};
      const FilteredFlow a = filtered_derivative_flow(oracle, p, incr, FilterVariant::LeviCivita, opts);
      const FilteredFlow b = filtered_derivative_flow(oracle, p, incr, FilterVariant::SemiConnection, opts);
      for (int k = 0; k <= coarse.steps; ++k) worst = std::max(worst, (a.maps[k] - b.maps[k]).norm());
    }
    o.require(worst <= C * coarse.dt(), std::string(id) + fmt(" variants differ by %.2e", worst));
  }
  return o;
}

Outcome run_report(const std::string& scenario, const std::string& check, RunConfig cfg = {}) {
  cfg.scenario = scenario;
  cfg.check = check;
  const RunReport r = run_check(cfg);
  Outcome o;
  o.pass = r.pass;
  o.details = scenario + " " + check + fmt(" %.3g (threshold %.3g)", r.paired.mean, r.threshold);
  return o;
}

void merge(Outcome& into, const Outcome& o) { into.require(o.pass, o.details); }

Outcome ljw_geometry() {
  Outcome o;
  for (const Scenario& s : scenario_catalog()) {
    merge(o, run_report(s.id, "geometry-connection"));
    merge(o, run_report(s.id, "geometry-ricci"));
  }
  return o;
}

Outcome quasi_invariance() {
  Outcome o;
  merge(o, run_report("sphere2-gradient", "compose"));
  for (const char* id : {"circle-full", "sphere2-gradient"}) {
    RunConfig cfg;
    cfg.tau = 1.0;
    const RunReport r = [&] {
      cfg.scenario = id;
      cfg.check = "girsanov";
      return run_check(cfg);
    }();
    std::string d = std::string(id) + fmt(" girsanov z %.3f", r.paired.z);
    if (!r.params["closed_form"].is_null()) d += fmt(" (means %.4f, %.4f vs sin(1)e^-1/2)", r.lhs.mean, r.rhs.mean);
    o.require(r.pass, d);
  }
  const McConfig cfg = mc();
  const Scenario& c = find_scenario("circle-full");
  const CameronMartinPath k = kpath(c, cfg);
  std::vector<double> w(cfg.paths);
  for (std::size_t i = 0; i < cfg.paths; ++i) w[i] = girsanov_weight(sample_noise(cfg.grid, 1, 42, i), k, 1.0);
  const Summary m = summarize(w);
  o.require(within(m, 1.0, 0.0), fmt("weight mean %.4f +- %.4f", m.mean, m.std_error));
  return o;
}

Outcome tau_differentiation() {
  Outcome o;
  const Scenario& s = find_scenario("circle-full");
  const McConfig cfg = mc();
  const TauDerivativeResult r = tau_derivative_check(*s.system, s.start, functional(s, "sin-end"), kpath(s, cfg), 1e-2, cfg);
  const PairedSummary& p = r.full.estimate.paired;
  o.require(std::abs(p.mean) <= 3.0 * p.std_error + 2.0 * r.bias_bound,
            fmt("gap %.2e, bias bound %.2e", p.mean, r.bias_bound));
  o.require(r.richardson_ratio >= 3.0 && r.richardson_ratio <= 5.0, fmt("Richardson ratio %.3f", r.richardson_ratio));
  return o;
}

Outcome determinism() {
  Outcome o;
  struct Case {
    const char* scenario;
    const char* check;
  };
  const std::vector<Case> cases{{"circle-full", "eq4"},         {"sphere2-drift", "eq5"},
                                {"sphere2-gradient", "eq9"},    {"torus2-transverse-drift", "girsanov"},
                                {"sphere2-drift", "tau-derivative"}, {"sphere2-drift", "conditional"},
                                {"sphere2-gradient", "geometry-ricci"}, {"torus2-degenerate", "geometry-connection"},
                                {"sphere2-gradient", "compose"}};
  for (const Case& c : cases) {
    RunConfig cfg;
    cfg.scenario = c.scenario;
    cfg.check = c.check;
    cfg.steps = 256;
    if (std::string(c.check).rfind("geometry", 0) != 0 && std::string(c.check) != "compose") cfg.paths = 3000;
    RunReport a = run_check(cfg);
    RunReport b = run_check(cfg);
    a.wall_ms = b.wall_ms = 0.0;
    const std::string name = std::string(c.scenario) + " " + c.check;
    o.require(a.dump() == b.dump(), name + " byte-identical");

    double worst = 0.0;
    for (int workers : {2, 4}) {
      cfg.workers = workers;
      const RunReport m = run_check(cfg);
      for (auto [x, y] : {std::pair{a.lhs.mean, m.lhs.mean}, std::pair{a.rhs.mean, m.rhs.mean},
                          std::pair{a.paired.mean, m.paired.mean}}) {
        const double scale = std::max(std::abs(x), std::abs(y));
        if (scale > 0.0) worst = std::max(worst, std::abs(x - y) / scale);
      }
    }
    o.require(worst <= 1e-12, name + fmt(" workers rel. diff %.1e", worst));
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
#ifdef __GLIBC__
  // Same allocator setting as ljwcheck, so timings match the CLI.
  mallopt(M_TRIM_THRESHOLD, 256 << 20);
#endif
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"circle_closed_form", circle_closed_form},
      {"filtered_matches_unfiltered_on_circle", filtered_matches_unfiltered_on_circle},
      {"filtered_identity", filtered_identity},
      {"multipoint_identity", multipoint_identity},
      {"filtering_consistency", filtering_consistency_criterion},
      {"sphere_filtered_decay", sphere_filtered_decay},
      {"ljw_geometry", ljw_geometry},
      {"quasi_invariance", quasi_invariance},
      {"tau_differentiation", tau_differentiation},
      {"determinism", determinism},
  };
  std::vector<std::string> wanted(argv + 1, argv + argc);
  int failures = 0;
  int ran = 0;
  for (const auto& [name, fn] : criteria) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), name) == wanted.end()) continue;
    ++ran;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.details = std::string("exception: ") + e.what();
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.details << std::endl;
    failures += o.pass ? 0 : 1;
  }
  if (ran == 0) {
    std::cerr << "no such criterion\n";
    return 2;
  }
  return failures == 0 ? 0 : 1;
}
