// Housing scout HTTP service and maintenance commands.
//
//   scout_server [serve] --data-dir data --port 8080
//   scout_server merge   --data-dir data
//   scout_server stats   --data-dir data
//
// Every flag can also be set through the matching SCOUT_* environment
// variable; a flag on the command line wins.

#include <CLI11.hpp>

#include <csignal>
#include <iostream>
#include <json.hpp>

#include "scout/api.hpp"

namespace {

scout::Service* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
}

int print_response(const scout::HttpResponse& response) {
  if (!response.body.empty()) {
    std::cout << nlohmann::ordered_json::parse(response.body).dump(2) << "\n";
  }
  return response.status < 300 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Refugee resettlement housing scout service"};
  app.require_subcommand(0, 1);
  app.fallthrough();

  std::string data_dir = "data";
  int port = 8080;
  std::string host = "0.0.0.0";
  double anchor_lat = scout::kDefaultAnchorLat;
  double anchor_lon = scout::kDefaultAnchorLon;
  double cell_size = scout::kDefaultRasterCellSize;
  double ceiling = scout::kDefaultAffordabilityCeiling;

  app.add_option("--data-dir", data_dir, "Directory holding places.csv, blockgroups.csv, ...")
      ->envname("SCOUT_DATA_DIR")
      ->capture_default_str();
  app.add_option("--port", port, "HTTP port")
      ->envname("SCOUT_PORT")
      ->check(CLI::Range(1, 65535))
      ->capture_default_str();
  app.add_option("--host", host, "Bind address")->envname("SCOUT_HOST")->capture_default_str();
  app.add_option("--anchor-lat", anchor_lat, "Latitude of the agency office")
      ->envname("SCOUT_ANCHOR_LAT")
      ->check(CLI::Range(-90.0, 90.0))
      ->capture_default_str();
  app.add_option("--anchor-lon", anchor_lon, "Longitude of the agency office")
      ->envname("SCOUT_ANCHOR_LON")
      ->check(CLI::Range(-180.0, 180.0))
      ->capture_default_str();
  app.add_option("--cell-size", cell_size, "Default raster cell size in degrees")
      ->envname("SCOUT_CELL_SIZE")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--ceiling", ceiling, "Drop block groups with estimated monthly cost above this")
      ->envname("SCOUT_CEILING")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service (default)");
  auto* merge_cmd = app.add_subcommand("merge", "Fold pending submissions into places.csv");
  auto* stats_cmd = app.add_subcommand("stats", "Print apartment cost statistics");

  CLI11_PARSE(app, argc, argv);

  scout::ServiceConfig config;
  config.data_root = data_dir;
  config.port = port;
  config.host = host;
  config.anchor = scout::GeoPoint(anchor_lat, anchor_lon);
  config.raster_cell_size = cell_size;
  config.affordability_ceiling = ceiling;

  try {
    scout::Service service(config);

    if (merge_cmd->parsed()) {
      return print_response(service.handle({"POST", "/api/admin/merge", {}, ""}));
    }
    if (stats_cmd->parsed()) {
      const auto response = service.handle({"GET", "/api/stats", {}, ""});
      if (response.status == 204) {
        std::cerr << "no priced apartments\n";
        return 1;
      }
      return print_response(response);
    }
    (void)serve_cmd;

    g_service = &service;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cerr << "serving " << service.snapshot()->catalog.places().size() << " places on "
              << config.host << ":" << config.port << "\n";
    if (!service.serve()) {
      std::cerr << "cannot listen on " << config.host << ":" << config.port << "\n";
      return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
