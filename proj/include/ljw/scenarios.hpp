#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ljw/connection.hpp"
#include "ljw/harness.hpp"

namespace ljw {

/// A registered diffusion with its default inputs for every check.
struct Scenario {
  std::string id;
  std::string description;
  std::shared_ptr<const DiffusionSystem> system;
  /// Rank of X, established by the startup constant-rank check.
  int rank = 0;

  Vec start;
  /// Unit tangent vector at `start` for derivative-flow checks.
  Vec tangent;
  /// k(t) = t * k_direction.
  Vec k_direction;
  /// Single-point functionals on the default grid; the first is the default.
  std::vector<CylindricalFunctional> functionals;
  /// Two-point functional and its base points, for the multi-point identity.
  CylindricalFunctional multipoint;
  std::vector<Vec> multipoint_bases;
  /// Test field u for the conditional check.
  VectorField test_field;
  /// Eigenvalue of Ric# on I(X) (every eigenvalue is equal for shipped scenarios).
  double ricci_eigenvalue = 0.0;
  /// Closed forms for the default functional at T = 1 with k(t) = t * k_direction.
  std::optional<double> eq4_closed_form;
  std::optional<double> girsanov_closed_form;  // at tau = 1
};

/// The fixed catalog, built and validated once on first use: constant rank
/// at 1000 quasi-random points, closed-form e, curvature and Ricci against
/// the numerical routes, and functional gradients against finite differences.
const std::vector<Scenario>& scenario_catalog();

/// Throws NotFoundError naming the closest registered id.
const Scenario& find_scenario(std::string_view id);

/// One "id  description" line per scenario.
std::string catalog_text();

/// Closest candidate by edit distance.
std::string nearest_match(std::string_view query, const std::vector<std::string>& candidates);

}  // namespace ljw
