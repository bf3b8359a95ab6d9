#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "scout/catalog.hpp"
#include "scout/geo.hpp"

namespace scout {

struct Neighbor {
  std::string id;
  double distance;  // meters, haversine

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Per-category nearest-neighbor and radius queries over a catalog snapshot.
///
/// Places are stored as points on the unit sphere in 3-D and organised in a
/// k-d tree. Great-circle distance is a strictly increasing function of chord
/// length (d = 2R asin(c/2)), so Euclidean pruning on chords never discards a
/// candidate, whatever the latitude: a degree of longitude shrinking with
/// cos(lat) is already accounted for by the embedding. Candidates found with
/// a small relative/absolute slack on the chord bound are then re-ranked with
/// haversine_distance, so answers are exactly those of a linear scan.
class PlaceIndex {
 public:
  PlaceIndex() = default;
  explicit PlaceIndex(const Catalog& catalog);

  /// Closest place of the category; ties go to the smaller id.
  std::optional<Neighbor> nearest(const GeoPoint& p, PlaceCategory category) const;

  /// All places of the category with distance <= radius, ordered by
  /// (distance, id). Throws std::invalid_argument for a negative radius.
  std::vector<Neighbor> within_radius(const GeoPoint& p, double radius, PlaceCategory category) const;

  std::size_t size(PlaceCategory category) const;

 private:
  struct Entry {
    std::array<double, 3> xyz;
    GeoPoint location;
    std::string id;
  };

  class Tree {
   public:
    explicit Tree(std::vector<Entry> entries);
    Tree() = default;

    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }
    /// Smallest squared chord from q to any entry.
    double min_chord2(const std::array<double, 3>& q) const;
    /// Entries whose squared chord to q is <= bound2.
    std::vector<const Entry*> within_chord2(const std::array<double, 3>& q, double bound2) const;

   private:
    void build(std::size_t lo, std::size_t hi, std::size_t depth);
    void nearest_rec(const std::array<double, 3>& q, std::size_t lo, std::size_t hi,
                     std::size_t depth, double& best) const;
    void range_rec(const std::array<double, 3>& q, double bound2, std::size_t lo, std::size_t hi,
                   std::size_t depth, std::vector<const Entry*>& out) const;

    std::vector<Entry> entries_;
  };

  std::array<Tree, kAllCategories.size()> trees_;
};

PlaceIndex build_index(const Catalog& catalog);

}  // namespace scout
