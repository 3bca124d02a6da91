#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "lens/cost_models.hpp"
#include "lens/search_space.hpp"

namespace lens {

// All three objectives are minimized. Error is in percent.
struct ObjectiveVector {
  double error = 0.0;
  double latency = 0.0;
  double energy = 0.0;

  std::array<double, 3> as_array() const noexcept { return {error, latency, energy}; }
  bool operator==(const ObjectiveVector&) const = default;
};

// a <= b in every objective and a < b in at least one.
bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) noexcept;

struct ArchiveEntry {
  ArchitectureGenome genome;
  ObjectiveVector objectives;
  DeploymentEvaluation deployment;
  std::size_t query = 0;  // position in the query log
};

class ParetoArchive {
 public:
  // Rejects the entry if any member dominates it or matches it in every
  // objective; otherwise inserts it and evicts every member it dominates.
  // Returns whether the entry was inserted.
  bool update(ArchiveEntry entry);

  const std::vector<ArchiveEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  std::vector<ObjectiveVector> objectives() const;

 private:
  std::vector<ArchiveEntry> entries_;
};

// Exact dominated hypervolume in three objectives, by sweeping the third
// objective and accumulating 2-D staircase areas. The reference must be
// strictly worse than every point in every objective; throws ValidationError
// otherwise. Dominated and duplicate points are allowed.
double hypervolume(std::span<const ObjectiveVector> points, const ObjectiveVector& reference);
double hypervolume(const ParetoArchive& archive, const ObjectiveVector& reference);

}  // namespace lens
