#include "lens/pareto.hpp"

#include <algorithm>
#include <cmath>

namespace lens {

bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) noexcept {
  const auto x = a.as_array();
  const auto y = b.as_array();
  bool strictly = false;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (x[k] > y[k]) return false;
    if (x[k] < y[k]) strictly = true;
  }
  return strictly;
}

bool ParetoArchive::update(ArchiveEntry entry) {
  for (const auto& member : entries_) {
    if (dominates(member.objectives, entry.objectives) || member.objectives == entry.objectives) return false;
  }
  std::erase_if(entries_, [&](const ArchiveEntry& member) { return dominates(entry.objectives, member.objectives); });
  entries_.push_back(std::move(entry));
  return true;
}

std::vector<ObjectiveVector> ParetoArchive::objectives() const {
  std::vector<ObjectiveVector> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.objectives);
  return out;
}

namespace {

// Area of the union of boxes [x_i, ref_x] x [y_i, ref_y].
double staircase_area(std::vector<std::array<double, 2>> pts, double ref_x, double ref_y) {
  std::sort(pts.begin(), pts.end());
  double area = 0.0;
  double ceiling = ref_y;
  for (const auto& p : pts) {
    if (p[1] < ceiling) {
      area += (ref_x - p[0]) * (ceiling - p[1]);
      ceiling = p[1];
    }
  }
  return area;
}

}  // namespace

double hypervolume(std::span<const ObjectiveVector> points, const ObjectiveVector& reference) {
  const auto ref = reference.as_array();
  for (const auto& p : points) {
    const auto a = p.as_array();
    for (std::size_t k = 0; k < 3; ++k) {
      if (!std::isfinite(a[k]) || !(a[k] < ref[k])) {
        throw ValidationError("hypervolume: reference point must be strictly worse than every point");
      }
    }
  }
  std::vector<ObjectiveVector> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const ObjectiveVector& a, const ObjectiveVector& b) { return a.energy < b.energy; });

  double volume = 0.0;
  std::vector<std::array<double, 2>> slice;
  slice.reserve(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    slice.push_back({sorted[i].error, sorted[i].latency});
    const double top = i + 1 < sorted.size() ? sorted[i + 1].energy : reference.energy;
    const double height = top - sorted[i].energy;
    if (height > 0.0) volume += height * staircase_area(slice, reference.error, reference.latency);
  }
  return volume;
}

double hypervolume(const ParetoArchive& archive, const ObjectiveVector& reference) {
  const auto pts = archive.objectives();
  return hypervolume(pts, reference);
}

}  // namespace lens
