#include "scout/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace scout {

namespace {

// Chord slack absorbs rounding differences between the unit-vector and
// haversine computations (1e-12 chord ~ 6 micrometres on the ground).
constexpr double kRelativeSlack = 1e-9;
constexpr double kAbsoluteSlack = 1e-12;

std::array<double, 3> to_unit(const GeoPoint& p) {
  const double phi = p.lat() * std::numbers::pi / 180.0;
  const double lambda = p.lon() * std::numbers::pi / 180.0;
  return {std::cos(phi) * std::cos(lambda), std::cos(phi) * std::sin(lambda), std::sin(phi)};
}

double chord2(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

double widen(double chord) { return chord * (1.0 + kRelativeSlack) + kAbsoluteSlack; }

bool by_distance_then_id(const Neighbor& a, const Neighbor& b) {
  if (a.distance != b.distance) return a.distance < b.distance;
  return a.id < b.id;
}

}  // namespace

PlaceIndex::Tree::Tree(std::vector<Entry> entries) : entries_(std::move(entries)) {
  // Fixed input order makes nth_element, and so the layout, deterministic.
  std::sort(entries_.begin(), entries_.end(),
            [](const Entry& a, const Entry& b) { return a.id < b.id; });
  build(0, entries_.size(), 0);
}

void PlaceIndex::Tree::build(std::size_t lo, std::size_t hi, std::size_t depth) {
  if (hi - lo <= 1) return;
  const std::size_t axis = depth % 3;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::nth_element(entries_.begin() + static_cast<std::ptrdiff_t>(lo),
                   entries_.begin() + static_cast<std::ptrdiff_t>(mid),
                   entries_.begin() + static_cast<std::ptrdiff_t>(hi),
                   [axis](const Entry& a, const Entry& b) { return a.xyz[axis] < b.xyz[axis]; });
  build(lo, mid, depth + 1);
  build(mid + 1, hi, depth + 1);
}

double PlaceIndex::Tree::min_chord2(const std::array<double, 3>& q) const {
  double best = std::numeric_limits<double>::infinity();
  nearest_rec(q, 0, entries_.size(), 0, best);
  return best;
}

void PlaceIndex::Tree::nearest_rec(const std::array<double, 3>& q, std::size_t lo, std::size_t hi,
                                   std::size_t depth, double& best) const {
  if (lo >= hi) return;
  const std::size_t mid = lo + (hi - lo) / 2;
  const Entry& node = entries_[mid];
  best = std::min(best, chord2(q, node.xyz));
  const std::size_t axis = depth % 3;
  const double diff = q[axis] - node.xyz[axis];
  const bool left_first = diff < 0.0;
  if (left_first) nearest_rec(q, lo, mid, depth + 1, best);
  else nearest_rec(q, mid + 1, hi, depth + 1, best);
  if (diff * diff <= best) {
    if (left_first) nearest_rec(q, mid + 1, hi, depth + 1, best);
    else nearest_rec(q, lo, mid, depth + 1, best);
  }
}

std::vector<const PlaceIndex::Entry*> PlaceIndex::Tree::within_chord2(
    const std::array<double, 3>& q, double bound2) const {
  std::vector<const Entry*> out;
  range_rec(q, bound2, 0, entries_.size(), 0, out);
  return out;
}

void PlaceIndex::Tree::range_rec(const std::array<double, 3>& q, double bound2, std::size_t lo,
                                 std::size_t hi, std::size_t depth,
                                 std::vector<const Entry*>& out) const {
  if (lo >= hi) return;
  const std::size_t mid = lo + (hi - lo) / 2;
  const Entry& node = entries_[mid];
  if (chord2(q, node.xyz) <= bound2) out.push_back(&node);
  const std::size_t axis = depth % 3;
  const double diff = q[axis] - node.xyz[axis];
  if (diff <= 0.0 || diff * diff <= bound2) range_rec(q, bound2, lo, mid, depth + 1, out);
  if (diff >= 0.0 || diff * diff <= bound2) range_rec(q, bound2, mid + 1, hi, depth + 1, out);
}

PlaceIndex::PlaceIndex(const Catalog& catalog) {
  std::array<std::vector<Entry>, kAllCategories.size()> buckets;
  for (const auto& p : catalog.places()) {
    buckets[static_cast<std::size_t>(p.category)].push_back(
        Entry{to_unit(p.location), p.location, p.id});
  }
  for (std::size_t i = 0; i < buckets.size(); ++i) trees_[i] = Tree(std::move(buckets[i]));
}

std::optional<Neighbor> PlaceIndex::nearest(const GeoPoint& p, PlaceCategory category) const {
  const Tree& tree = trees_[static_cast<std::size_t>(category)];
  if (tree.empty()) return std::nullopt;
  const auto q = to_unit(p);
  const double best = std::sqrt(tree.min_chord2(q));
  const double bound = widen(best);
  std::optional<Neighbor> result;
  for (const Entry* e : tree.within_chord2(q, bound * bound)) {
    Neighbor candidate{e->id, haversine_distance(p, e->location)};
    if (!result || by_distance_then_id(candidate, *result)) result = std::move(candidate);
  }
  return result;
}

std::vector<Neighbor> PlaceIndex::within_radius(const GeoPoint& p, double radius,
                                                PlaceCategory category) const {
  if (!(radius >= 0.0)) throw std::invalid_argument("radius must be non-negative");
  const Tree& tree = trees_[static_cast<std::size_t>(category)];
  std::vector<Neighbor> out;
  if (tree.empty()) return out;
  const double angle = std::min(radius / kEarthRadiusMeters, std::numbers::pi);
  const double bound = widen(2.0 * std::sin(angle / 2.0));
  for (const Entry* e : tree.within_chord2(to_unit(p), bound * bound)) {
    const double d = haversine_distance(p, e->location);
    if (d <= radius) out.push_back(Neighbor{e->id, d});
  }
  std::sort(out.begin(), out.end(), by_distance_then_id);
  return out;
}

std::size_t PlaceIndex::size(PlaceCategory category) const {
  return trees_[static_cast<std::size_t>(category)].size();
}

PlaceIndex build_index(const Catalog& catalog) { return PlaceIndex(catalog); }

}  // namespace scout
