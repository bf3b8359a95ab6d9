#include "scout/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace scout {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

// Slack when turning an extent/cell_size quotient into a cell count, so that
// 0.3/0.1 = 2.9999999999999996 does not grow an extra row.
constexpr double kCountSlack = 1e-9;

std::size_t cell_count_for(double extent, double cell_size) {
  const double q = extent / cell_size;
  const auto n = static_cast<std::size_t>(std::ceil(q - kCountSlack));
  return std::max<std::size_t>(n, 1);
}

bool on_segment(double px, double py, double ax, double ay, double bx, double by) {
  const double cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax);
  if (cross != 0.0) return false;
  return px >= std::min(ax, bx) && px <= std::max(ax, bx) && py >= std::min(ay, by) &&
         py <= std::max(ay, by);
}

}  // namespace

GeoPoint::GeoPoint(double lat, double lon) : lat_(lat), lon_(lon) {
  if (!std::isfinite(lat) || lat < -90.0 || lat > 90.0) {
    throw std::invalid_argument("latitude out of range: " + std::to_string(lat));
  }
  if (!std::isfinite(lon) || lon < -180.0 || lon > 180.0) {
    throw std::invalid_argument("longitude out of range: " + std::to_string(lon));
  }
}

BoundingBox BoundingBox::make(double min_lat, double max_lat, double min_lon, double max_lon) {
  for (double v : {min_lat, max_lat, min_lon, max_lon}) {
    if (!std::isfinite(v)) throw std::invalid_argument("bounding box bound is not finite");
  }
  if (min_lat > max_lat || min_lon > max_lon) {
    throw std::invalid_argument("bounding box has min greater than max");
  }
  return BoundingBox{min_lat, max_lat, min_lon, max_lon};
}

BoundingBox bounding_box_of(std::span<const GeoPoint> points) {
  if (points.empty()) throw std::invalid_argument("bounding box of no points");
  BoundingBox box{points[0].lat(), points[0].lat(), points[0].lon(), points[0].lon()};
  for (const auto& p : points.subspan(1)) {
    box.min_lat = std::min(box.min_lat, p.lat());
    box.max_lat = std::max(box.max_lat, p.lat());
    box.min_lon = std::min(box.min_lon, p.lon());
    box.max_lon = std::max(box.max_lon, p.lon());
  }
  return box;
}

RasterGrid::RasterGrid(GridSpec spec)
    : spec_(spec), values_(spec.rows * spec.cols, kMissing) {}

bool RasterGrid::is_missing(double v) { return std::isnan(v); }

double RasterGrid::at(std::size_t row, std::size_t col) const {
  if (row >= spec_.rows || col >= spec_.cols) throw std::out_of_range("raster index out of range");
  return values_[row * spec_.cols + col];
}

void RasterGrid::set(std::size_t row, std::size_t col, double v) {
  if (row >= spec_.rows || col >= spec_.cols) throw std::out_of_range("raster index out of range");
  if (!is_missing(v) && !(v >= 0.0 && v <= 1.0)) {
    throw std::invalid_argument("raster value outside [0,1]");
  }
  values_[row * spec_.cols + col] = v;
}

double haversine_distance(const GeoPoint& a, const GeoPoint& b) {
  const double phi1 = a.lat() * kDegToRad;
  const double phi2 = b.lat() * kDegToRad;
  const double dphi = (b.lat() - a.lat()) * kDegToRad;
  const double dlambda = (b.lon() - a.lon()) * kDegToRad;
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusMeters * std::asin(std::sqrt(h));
}

GridSpec grid_from_bbox(const BoundingBox& bbox, double cell_size) {
  if (!std::isfinite(cell_size) || cell_size <= 0.0) {
    throw std::invalid_argument("cell_size must be positive");
  }
  return GridSpec{bbox, cell_size, cell_count_for(bbox.max_lat - bbox.min_lat, cell_size),
                  cell_count_for(bbox.max_lon - bbox.min_lon, cell_size)};
}

GeoPoint cell_center(const GridSpec& spec, std::size_t row, std::size_t col) {
  if (row >= spec.rows || col >= spec.cols) {
    throw std::out_of_range("cell index out of range");
  }
  const double lat = spec.bbox.max_lat - (static_cast<double>(row) + 0.5) * spec.cell_size;
  const double lon = spec.bbox.min_lon + (static_cast<double>(col) + 0.5) * spec.cell_size;
  return GeoPoint(lat, lon);
}

std::size_t distinct_vertex_count(std::span<const GeoPoint> ring) {
  std::vector<GeoPoint> seen;
  for (const auto& p : ring) {
    if (std::find(seen.begin(), seen.end(), p) == seen.end()) seen.push_back(p);
  }
  return seen.size();
}

bool point_in_polygon(const GeoPoint& p, std::span<const GeoPoint> ring) {
  if (ring.size() < 3 || distinct_vertex_count(ring) < 3) {
    throw std::invalid_argument("polygon ring needs at least 3 distinct vertices");
  }
  const double px = p.lon();
  const double py = p.lat();
  const std::size_t n = ring.size();
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const double xi = ring[i].lon(), yi = ring[i].lat();
    const double xj = ring[j].lon(), yj = ring[j].lat();
    if (on_segment(px, py, xj, yj, xi, yi)) return true;
    if ((yi > py) != (yj > py)) {
      const double x_cross = xj + (py - yj) * (xi - xj) / (yi - yj);
      if (px < x_cross) inside = !inside;
    }
  }
  return inside;
}

}  // namespace scout
