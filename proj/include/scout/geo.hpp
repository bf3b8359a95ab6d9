#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace scout {

inline constexpr double kEarthRadiusMeters = 6'371'000.0;
inline constexpr double kMileMeters = 1'609.34;

/// WGS84-style latitude/longitude in degrees. Construction validates ranges.
class GeoPoint {
 public:
  GeoPoint(double lat, double lon);

  double lat() const { return lat_; }
  double lon() const { return lon_; }

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;

 private:
  double lat_;
  double lon_;
};

struct BoundingBox {
  double min_lat;
  double max_lat;
  double min_lon;
  double max_lon;

  /// Throws std::invalid_argument if min > max or a bound is not finite.
  static BoundingBox make(double min_lat, double max_lat, double min_lon, double max_lon);

  bool contains(const GeoPoint& p) const {
    return p.lat() >= min_lat && p.lat() <= max_lat && p.lon() >= min_lon && p.lon() <= max_lon;
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Smallest box enclosing every point. Requires a non-empty span.
BoundingBox bounding_box_of(std::span<const GeoPoint> points);

struct GridSpec {
  BoundingBox bbox;
  double cell_size;  // degrees
  std::size_t rows;
  std::size_t cols;

  std::size_t cell_count() const { return rows * cols; }
};

/// Row-major raster of scores. Missing cells hold NaN.
class RasterGrid {
 public:
  static constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

  explicit RasterGrid(GridSpec spec);

  const GridSpec& spec() const { return spec_; }
  std::span<const double> values() const { return values_; }

  static bool is_missing(double v);
  double at(std::size_t row, std::size_t col) const;
  /// v must be missing or in [0,1].
  void set(std::size_t row, std::size_t col, double v);

 private:
  GridSpec spec_;
  std::vector<double> values_;
};

/// Great-circle distance in meters on a sphere of radius kEarthRadiusMeters.
double haversine_distance(const GeoPoint& a, const GeoPoint& b);

/// Cell (0,0) is the north-west corner.
GridSpec grid_from_bbox(const BoundingBox& bbox, double cell_size);

GeoPoint cell_center(const GridSpec& spec, std::size_t row, std::size_t col);

/// Even-odd test in planar lat/lon. Points on an edge or vertex are inside.
/// The ring may be closed (first == last) or open.
bool point_in_polygon(const GeoPoint& p, std::span<const GeoPoint> ring);

/// Number of distinct vertices after dropping a closing duplicate.
std::size_t distinct_vertex_count(std::span<const GeoPoint> ring);

}  // namespace scout
