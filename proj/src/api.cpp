#include "scout/api.hpp"

#include <httplib.h>

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "scout/digest.hpp"

namespace scout {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

std::optional<std::string> read_optional_file(const fs::path& path) {
  std::error_code ec;
  if (!fs::exists(path, ec)) return std::nullopt;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

HttpResponse json_response(int status, const Json& body) {
  return HttpResponse{status, "application/json", body.dump()};
}

HttpResponse error_response(int status, const std::string& message, const std::string& field = "") {
  Json body;
  body["error"] = message;
  if (!field.empty()) body["field"] = field;
  return json_response(status, body);
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json point_feature(const Place& p) {
  Json props;
  props["id"] = p.id;
  props["name"] = p.name;
  props["category"] = std::string(to_string(p.category));
  props["address"] = p.address;
  if (p.phone) props["phone"] = *p.phone;
  if (p.zipcode) props["zipcode"] = *p.zipcode;
  if (p.website) props["website"] = *p.website;
  if (p.faith_tradition) props["faith_tradition"] = *p.faith_tradition;
  if (const auto* a = p.apartment()) {
    if (a->monthly_cost) props["monthly_cost"] = *a->monthly_cost;
    if (a->anchor_distance) props["anchor_distance"] = *a->anchor_distance;
    if (a->travel_minutes) props["travel_minutes"] = *a->travel_minutes;
  }
  if (const auto* s = p.school()) {
    if (s->is_public) props["is_public"] = *s->is_public;
    if (s->free_reduced_lunch_pct) props["free_reduced_lunch_pct"] = *s->free_reduced_lunch_pct;
    if (s->rating) props["rating"] = *s->rating;
  }
  Json feature;
  feature["type"] = "Feature";
  feature["geometry"] = {{"type", "Point"},
                         {"coordinates", Json::array({p.location.lon(), p.location.lat()})}};
  feature["properties"] = std::move(props);
  return feature;
}

Json polygon_geometry(const std::vector<GeoPoint>& ring) {
  Json coords = Json::array();
  for (const auto& v : ring) coords.push_back(Json::array({v.lon(), v.lat()}));
  if (ring.front() != ring.back()) {
    coords.push_back(Json::array({ring.front().lon(), ring.front().lat()}));
  }
  return {{"type", "Polygon"}, {"coordinates", Json::array({std::move(coords)})}};
}

Json feature_collection(Json features) {
  Json fc;
  fc["type"] = "FeatureCollection";
  fc["features"] = std::move(features);
  return fc;
}

Json breakdown_json(const ScoreBreakdown& b) {
  Json criteria;
  for (auto c : kAllCriteria) {
    const auto& entry = b[c];
    criteria[std::string(to_string(c))] = {{"score", optional_json(entry.score)},
                                           {"effective_weight", entry.effective_weight}};
  }
  Json out;
  out["composite"] = optional_json(b.composite);
  out["completeness"] = b.completeness;
  out["criteria"] = std::move(criteria);
  return out;
}

std::optional<BoundingBox> study_area(const Catalog& catalog) {
  std::vector<GeoPoint> points;
  for (const auto& g : catalog.block_groups()) {
    points.emplace_back(g.bbox.min_lat, g.bbox.min_lon);
    points.emplace_back(g.bbox.max_lat, g.bbox.max_lon);
  }
  for (const auto& p : catalog.places()) points.push_back(p.location);
  if (points.empty()) return std::nullopt;
  return bounding_box_of(points);
}

std::optional<std::string> optional_string_field(const Json& body, const std::string& key) {
  if (!body.contains(key) || body[key].is_null()) return std::nullopt;
  if (!body[key].is_string()) throw SubmissionError(key, key + " must be a string");
  return body[key].get<std::string>();
}

}  // namespace

void ServiceConfig::validate() const {
  if (port < 1 || port > 65535) throw std::invalid_argument("port must be in [1, 65535]");
  if (!std::isfinite(raster_cell_size) || raster_cell_size <= 0.0) {
    throw std::invalid_argument("raster cell size must be positive");
  }
  if (!std::isfinite(affordability_ceiling) || affordability_ceiling <= 0.0) {
    throw std::invalid_argument("affordability ceiling must be positive");
  }
  proximity.validate();
}

Snapshot::Snapshot(Catalog c) : catalog(std::move(c)), index(catalog), tables(catalog) {}

struct Service::ServerHandle {
  httplib::Server server;
};

Service::Service(ServiceConfig config, std::unique_ptr<Geocoder> geocoder, Clock clock)
    : config_(std::move(config)),
      geocoder_(std::move(geocoder)),
      clock_(std::move(clock)),
      store_(config_.data_root),
      server_(std::make_shared<ServerHandle>()) {
  config_.validate();
  if (!geocoder_) {
    auto table = std::make_unique<TableGeocoder>();
    if (auto content = read_optional_file(config_.data_root / "geocode.csv")) {
      *table = TableGeocoder::parse_csv(*content);
    }
    geocoder_ = std::move(table);
  }
  snapshot_ = load();
}

std::shared_ptr<const Snapshot> Service::load() const {
  CategoryAliases aliases = CategoryAliases::defaults();
  if (auto content = read_optional_file(config_.data_root / "category_aliases.csv")) {
    aliases.merge(CategoryAliases::parse_csv(*content));
  }
  std::vector<Place> places;
  if (auto content = read_optional_file(config_.data_root / "places.csv")) {
    places = parse_places_csv(*content, aliases);
  }
  std::vector<BlockGroup> groups;
  if (auto content = read_optional_file(config_.data_root / "blockgroups.csv")) {
    groups = filter_affordable(parse_blockgroups_csv(*content), config_.affordability_ceiling);
  }
  return std::make_shared<const Snapshot>(
      Catalog(std::move(places), std::move(groups), config_.anchor));
}

std::shared_ptr<const Snapshot> Service::snapshot() const {
  std::lock_guard lock(snapshot_mutex_);
  return snapshot_;
}

void Service::swap(std::shared_ptr<const Snapshot> next) {
  std::lock_guard lock(snapshot_mutex_);
  snapshot_ = std::move(next);
}

void Service::reload() {
  std::lock_guard lock(merge_mutex_);
  swap(load());
}

HttpResponse Service::handle(const HttpRequest& request) {
  const std::string& path = request.path;
  const bool is_get = request.method == "GET";
  const bool is_post = request.method == "POST";
  try {
    if (path == "/api/health") return is_get ? get_health() : error_response(405, "use GET");
    if (path == "/api/places") return is_get ? get_places(request) : error_response(405, "use GET");
    if (path == "/api/stats") return is_get ? get_stats() : error_response(405, "use GET");
    if (path.starts_with("/api/layers/")) {
      return is_get ? get_layer(path.substr(std::string_view("/api/layers/").size()))
                    : error_response(405, "use GET");
    }
    if (path == "/api/score") return is_post ? post_score(request) : error_response(405, "use POST");
    if (path == "/api/apartments") {
      return is_post ? post_apartment(request) : error_response(405, "use POST");
    }
    if (path == "/api/admin/merge") return is_post ? post_merge() : error_response(405, "use POST");
    return error_response(404, "no such endpoint: " + path);
  } catch (const StorageError& e) {
    return error_response(503, e.what());
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
}

HttpResponse Service::get_health() const {
  const auto snap = snapshot();
  Json body;
  body["status"] = "ok";
  body["catalog_loaded"] = snap != nullptr;
  body["place_count"] = snap ? snap->catalog.places().size() : 0;
  return json_response(200, body);
}

HttpResponse Service::get_places(const HttpRequest& request) const {
  auto it = request.query.find("category");
  if (it == request.query.end()) return error_response(400, "category is required", "category");
  const auto category = category_from_name(it->second);
  if (!category) return error_response(400, "unknown category: " + it->second, "category");

  const auto snap = snapshot();
  Json features = Json::array();
  for (const auto& p : snap->catalog.places()) {
    if (p.category == *category) features.push_back(point_feature(p));
  }
  return json_response(200, feature_collection(std::move(features)));
}

HttpResponse Service::get_layer(const std::string& name) const {
  const auto criterion = criterion_from_name(name);
  if (!criterion || !is_area_criterion(*criterion)) {
    // streets and default are client-side base maps.
    return error_response(404, "no data layer named " + name);
  }
  const auto snap = snapshot();
  Json features = Json::array();
  for (const auto& g : snap->catalog.block_groups()) {
    Json props;
    props["id"] = g.id;
    props["value"] = optional_json(PercentileTable::raw_value(*criterion, g));
    props["percentile"] = optional_json(snap->tables.lookup(*criterion, g.id));
    Json feature;
    feature["type"] = "Feature";
    feature["geometry"] = polygon_geometry(g.boundary);
    feature["properties"] = std::move(props);
    features.push_back(std::move(feature));
  }
  return json_response(200, feature_collection(std::move(features)));
}

HttpResponse Service::post_score(const HttpRequest& request) const {
  Json body;
  try {
    body = Json::parse(request.body);
  } catch (const Json::parse_error&) {
    return error_response(400, "request body is not valid JSON");
  }
  if (!body.is_object()) return error_response(400, "request body must be a JSON object");
  if (!body.contains("weights") || !body["weights"].is_object()) {
    return error_response(422, "weights must be an object", "weights");
  }

  std::array<double, kCriterionCount> raw{};
  for (const auto& [key, value] : body["weights"].items()) {
    const auto c = criterion_from_name(key);
    if (!c) return error_response(422, "unknown criterion " + key, "weights." + key);
    if (!value.is_number()) return error_response(422, key + " must be a number", "weights." + key);
    raw[static_cast<std::size_t>(*c)] = value.get<double>();
  }
  std::optional<WeightVector> weights;
  try {
    weights.emplace(raw);
  } catch (const WeightError& e) {
    return error_response(422, e.what(), e.field().empty() ? "weights" : "weights." + e.field());
  }

  double cell_size = config_.raster_cell_size;
  if (body.contains("cell_size") && !body["cell_size"].is_null()) {
    if (!body["cell_size"].is_number() || !(body["cell_size"].get<double>() > 0.0)) {
      return error_response(422, "cell_size must be a positive number", "cell_size");
    }
    cell_size = body["cell_size"].get<double>();
  }

  const auto snap = snapshot();
  const ScoringContext ctx{snap->catalog, snap->index, snap->tables, config_.proximity};

  Json raster = nullptr;
  if (const auto area = study_area(snap->catalog)) {
    const GridSpec spec = grid_from_bbox(*area, cell_size);
    if (spec.rows > config_.max_raster_cells / spec.cols) {
      return error_response(422, "raster would exceed " + std::to_string(config_.max_raster_cells) +
                                     " cells", "cell_size");
    }
    const RasterGrid grid = score_raster(ctx, spec, *weights);
    Json values = Json::array();
    for (double v : grid.values()) {
      values.push_back(RasterGrid::is_missing(v) ? Json(nullptr) : Json(v));
    }
    raster = Json::object();
    raster["bbox"] = {{"min_lat", spec.bbox.min_lat},
                      {"max_lat", spec.bbox.max_lat},
                      {"min_lon", spec.bbox.min_lon},
                      {"max_lon", spec.bbox.max_lon}};
    raster["rows"] = spec.rows;
    raster["cols"] = spec.cols;
    raster["cell_size"] = spec.cell_size;
    raster["values"] = std::move(values);
  }

  const auto apartments = snap->catalog.places_in(PlaceCategory::apartment);
  Json ranking = Json::array();
  for (const auto& r : rank_apartments(ctx, apartments, *weights)) {
    Json entry;
    entry["rank"] = r.rank;
    entry["id"] = r.id;
    entry["name"] = r.name;
    entry["composite"] = optional_json(r.breakdown.composite);
    entry["breakdown"] = breakdown_json(r.breakdown);
    ranking.push_back(std::move(entry));
  }

  Json out;
  out["raster"] = std::move(raster);
  out["ranking"] = std::move(ranking);
  return json_response(200, out);
}

HttpResponse Service::post_apartment(const HttpRequest& request) {
  Json body;
  try {
    body = Json::parse(request.body);
  } catch (const Json::parse_error&) {
    return error_response(400, "request body is not valid JSON");
  }
  if (!body.is_object()) return error_response(400, "request body must be a JSON object");

  try {
    const auto name = optional_string_field(body, "name");
    const auto address = optional_string_field(body, "address");
    const auto phone = optional_string_field(body, "phone");
    const auto website = optional_string_field(body, "website");
    std::optional<double> rent;
    if (body.contains("rent") && !body["rent"].is_null()) {
      if (!body["rent"].is_number()) return error_response(422, "rent must be a number", "rent");
      rent = body["rent"].get<double>();
    }
    const auto submission =
        Submission::make(name.value_or(""), address.value_or(""),
                         phone ? std::optional<std::string_view>(*phone) : std::nullopt,
                         website ? std::optional<std::string_view>(*website) : std::nullopt, rent);
    const std::string filename = store_.save(submission, clock_());
    return json_response(201, Json{{"filename", filename}});
  } catch (const SubmissionError& e) {
    return error_response(422, e.what(), e.field());
  }
}

HttpResponse Service::get_stats() const {
  const auto snap = snapshot();
  try {
    const auto stats = catalog_stats(snap->catalog.places_in(PlaceCategory::apartment));
    Json body;
    body["count"] = stats.count;
    body["median_cost"] = stats.median_cost;
    body["stddev_cost"] = stats.stddev_cost;
    body["unpriced"] = stats.unpriced;
    return json_response(200, body);
  } catch (const EmptyStatisticsError&) {
    return HttpResponse{204, "application/json", ""};
  }
}

HttpResponse Service::post_merge() {
  std::lock_guard lock(merge_mutex_);
  const auto current = snapshot();
  auto [merged, report] = store_.merge_pending(current->catalog, *geocoder_);

  if (report.count(MergeEntry::Outcome::added) > 0) {
    const fs::path listing = config_.data_root / "places.csv";
    const fs::path tmp = listing.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw StorageError("cannot write " + tmp.string());
      out << serialize_places_csv(merged.places());
      if (!out) throw StorageError("short write to " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, listing, ec);
    if (ec) throw StorageError("cannot replace " + listing.string() + ": " + ec.message());
    swap(std::make_shared<const Snapshot>(std::move(merged)));
  }

  Json entries = Json::array();
  for (const auto& e : report.entries) {
    Json entry;
    entry["filename"] = e.filename;
    entry["outcome"] = std::string(to_string(e.outcome));
    if (!e.place_id.empty()) entry["place_id"] = e.place_id;
    if (!e.reason.empty()) entry["reason"] = e.reason;
    entries.push_back(std::move(entry));
  }
  Json body;
  body["added"] = report.count(MergeEntry::Outcome::added);
  body["duplicates"] = report.count(MergeEntry::Outcome::duplicate);
  body["rejected"] = report.count(MergeEntry::Outcome::rejected);
  body["entries"] = std::move(entries);
  return json_response(200, body);
}

bool Service::serve() {
  auto& server = server_->server;
  auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
    HttpRequest request{req.method, req.path, {}, req.body};
    for (const auto& [key, value] : req.params) request.query.emplace(key, value);
    const HttpResponse response = handle(request);
    res.status = response.status;
    res.set_header("Access-Control-Allow-Origin", "*");
    if (response.status != 204) res.set_content(response.body, response.content_type);
  };
  server.Get(".*", dispatch);
  server.Post(".*", dispatch);
  server.Options(".*", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
  return server.listen(config_.host, config_.port);
}

void Service::stop() { server_->server.stop(); }

bool Service::running() const { return server_->server.is_running(); }

}  // namespace scout
