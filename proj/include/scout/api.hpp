#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "scout/catalog.hpp"
#include "scout/geo.hpp"
#include "scout/scoring.hpp"
#include "scout/spatial_index.hpp"
#include "scout/submission.hpp"

namespace scout {

// Approximate location of the resettlement agency office (Henderson Mill
// Rd, DeKalb County). Deployments should pass the surveyed point.
inline constexpr double kDefaultAnchorLat = 33.858;
inline constexpr double kDefaultAnchorLon = -84.253;

struct ServiceConfig {
  std::filesystem::path data_root = "data";
  int port = 8080;
  std::string host = "0.0.0.0";
  GeoPoint anchor{kDefaultAnchorLat, kDefaultAnchorLon};
  double raster_cell_size = kDefaultRasterCellSize;
  double affordability_ceiling = kDefaultAffordabilityCeiling;
  ProximityConfig proximity;
  std::size_t max_raster_cells = 1'000'000;

  void validate() const;
};

/// Loaded catalog with everything derived from it. Immutable once built.
struct Snapshot {
  Catalog catalog;
  PlaceIndex index;
  PercentileTable tables;

  explicit Snapshot(Catalog c);
};

struct HttpRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

/// Files read from the data root:
///   places.csv             place listings (optional)
///   blockgroups.csv        block-group attributes (optional)
///   category_aliases.csv   extra raw-type aliases (optional)
///   geocode.csv            address table for the default geocoder (optional)
///   pending/ archived/ rejected/   submission tree
class Service {
 public:
  using Clock = std::function<std::chrono::system_clock::time_point()>;

  /// Loads the data root; throws on malformed input files. A null geocoder
  /// means the table geocoder built from geocode.csv.
  explicit Service(ServiceConfig config, std::unique_ptr<Geocoder> geocoder = nullptr,
                   Clock clock = std::chrono::system_clock::now);

  const ServiceConfig& config() const { return config_; }
  std::shared_ptr<const Snapshot> snapshot() const;

  /// Re-reads the data root and swaps in a fresh snapshot.
  void reload();

  HttpResponse handle(const HttpRequest& request);

  /// Blocks serving HTTP on config().host:config().port until stop().
  bool serve();
  void stop();
  bool running() const;

 private:
  HttpResponse get_places(const HttpRequest& request) const;
  HttpResponse get_layer(const std::string& name) const;
  HttpResponse post_score(const HttpRequest& request) const;
  HttpResponse post_apartment(const HttpRequest& request);
  HttpResponse get_stats() const;
  HttpResponse get_health() const;
  HttpResponse post_merge();

  std::shared_ptr<const Snapshot> load() const;
  void swap(std::shared_ptr<const Snapshot> next);

  ServiceConfig config_;
  std::unique_ptr<Geocoder> geocoder_;
  Clock clock_;
  SubmissionStore store_;

  mutable std::mutex snapshot_mutex_;
  std::shared_ptr<const Snapshot> snapshot_;
  std::mutex merge_mutex_;

  struct ServerHandle;
  std::shared_ptr<ServerHandle> server_;
};

}  // namespace scout
