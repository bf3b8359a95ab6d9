#include "scout/catalog.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include "scout/csv.hpp"
#include "scout/digest.hpp"

namespace scout {

namespace {

constexpr std::array<std::string_view, 12> kCategoryNames = {
    "apartment", "transit_stop", "school",   "market",     "faith_center", "esl",
    "daycare",   "health",       "hospital", "dds_office", "dfcs_office",  "ssn_office",
};

// Vocabulary seen in Places/Great Schools exports. Sites extend this with
// category_aliases.csv in the data directory.
constexpr std::string_view kDefaultAliases =
    "raw,category\n"
    "Real estate,apartment\n"
    "apartment complex,apartment\n"
    "Grocery/supermarket,market\n"
    "grocery,market\n"
    "supermarket,market\n"
    "international grocery,market\n"
    "health,health\n"
    "doctor,health\n"
    "hospital,hospital\n"
    "synagogue,faith_center\n"
    "church,faith_center\n"
    "mosque,faith_center\n"
    "temple,faith_center\n"
    "place of worship,faith_center\n"
    "ESL,esl\n"
    "daycare,daycare\n"
    "school,school\n"
    "transit,transit_stop\n"
    "transit station,transit_stop\n"
    "bus station,transit_stop\n"
    "train station,transit_stop\n"
    "subway station,transit_stop\n"
    "MARTA,transit_stop\n"
    "DDS,dds_office\n"
    "DFCS,dfcs_office\n"
    "SSN,ssn_office\n"
    "social security office,ssn_office\n";

constexpr std::array<std::string_view, 7> kPlaceHeader = {
    "Place Name", "Place Type", "latitude", "longitude", "Place Address", "Phone", "Zipcode",
};

enum class OptionalColumn { website, monthly_cost, travel_minutes, is_public, lunch_pct, rating, faith };

constexpr std::array<std::pair<std::string_view, OptionalColumn>, 7> kOptionalColumns = {{
    {"Website", OptionalColumn::website},
    {"Monthly Cost", OptionalColumn::monthly_cost},
    {"Travel Minutes", OptionalColumn::travel_minutes},
    {"Public", OptionalColumn::is_public},
    {"Free Reduced Lunch Pct", OptionalColumn::lunch_pct},
    {"Rating", OptionalColumn::rating},
    {"Faith Tradition", OptionalColumn::faith},
}};

constexpr std::array<std::string_view, 7> kBlockGroupHeader = {
    "GeoID", "Boundary", "PctIncomeHousing", "MedianIncome", "JobsIndex", "RetailIndex", "CrimeIndex",
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<std::string> optional_text(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  return std::string(s);
}

void expect_header(const csv::Row& row, std::span<const std::string_view> expected,
                   bool allow_trailing) {
  bool ok = row.fields.size() >= expected.size() &&
            (allow_trailing || row.fields.size() == expected.size());
  for (std::size_t i = 0; ok && i < expected.size(); ++i) {
    ok = trim(row.fields[i]) == expected[i];
  }
  if (!ok) {
    std::string want;
    for (auto e : expected) want += (want.empty() ? "" : ",") + std::string(e);
    throw SchemaError(row.line, "expected header \"" + want + "\"");
  }
}

std::vector<csv::Row> read_rows(std::string_view content) {
  try {
    return csv::parse(content);
  } catch (const std::runtime_error& e) {
    throw SchemaError(0, e.what());
  }
}

std::string format_coordinate(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string optional_number(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

std::vector<GeoPoint> parse_ring(std::string_view text) {
  std::vector<GeoPoint> ring;
  while (!trim(text).empty()) {
    const auto semi = text.find(';');
    const std::string_view vertex = trim(text.substr(0, semi));
    text = semi == std::string_view::npos ? std::string_view{} : text.substr(semi + 1);
    if (vertex.empty()) continue;
    const auto space = vertex.find_first_of(" \t");
    if (space == std::string_view::npos) {
      throw std::invalid_argument("vertex \"" + std::string(vertex) + "\" is not \"lat lon\"");
    }
    const auto lat = parse_number(vertex.substr(0, space));
    const auto lon = parse_number(vertex.substr(space + 1));
    if (!lat || !lon) {
      throw std::invalid_argument("vertex \"" + std::string(vertex) + "\" is not numeric");
    }
    ring.emplace_back(*lat, *lon);
  }
  return ring;
}

}  // namespace

std::string_view to_string(PlaceCategory c) { return kCategoryNames[static_cast<std::size_t>(c)]; }

std::optional<PlaceCategory> category_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kCategoryNames.size(); ++i) {
    if (kCategoryNames[i] == name) return static_cast<PlaceCategory>(i);
  }
  return std::nullopt;
}

CategoryAliases CategoryAliases::defaults() {
  static const CategoryAliases table = parse_csv(kDefaultAliases);
  return table;
}

CategoryAliases CategoryAliases::parse_csv(std::string_view content) {
  const auto rows = read_rows(content);
  if (rows.empty()) throw SchemaError(1, "missing header \"raw,category\"");
  static constexpr std::array<std::string_view, 2> kHeader = {"raw", "category"};
  expect_header(rows[0], kHeader, false);
  CategoryAliases out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.fields.size() != 2) throw RowError(i, row.line, "alias row needs 2 fields");
    const auto raw = lower(trim(row.fields[0]));
    const auto category = category_from_name(trim(row.fields[1]));
    if (raw.empty()) throw RowError(i, row.line, "empty alias");
    if (!category) {
      throw RowError(i, row.line, "unknown category \"" + row.fields[1] + "\"");
    }
    out.table_[raw] = *category;
  }
  return out;
}

void CategoryAliases::merge(const CategoryAliases& other) {
  for (const auto& [raw, category] : other.table_) table_[raw] = category;
}

std::optional<PlaceCategory> CategoryAliases::resolve(std::string_view raw) const {
  const auto key = lower(trim(raw));
  if (auto c = category_from_name(key)) return c;
  if (auto it = table_.find(key); it != table_.end()) return it->second;
  return std::nullopt;
}

std::string place_id(std::string_view name, const GeoPoint& location) {
  std::string key(name);
  key += '\x1f';
  key += format_coordinate(location.lat());
  key += '\x1f';
  key += format_coordinate(location.lon());
  return "p" + md5_hex(key).substr(0, 16);
}

BlockGroup BlockGroup::make(std::string id, std::vector<GeoPoint> boundary,
                            double pct_income_on_housing, double median_annual_income,
                            double jobs_index, double retail_index,
                            std::optional<double> crime_index) {
  if (id.empty()) throw std::invalid_argument("block group id is empty");
  if (boundary.size() < 3 || distinct_vertex_count(boundary) < 3) {
    throw std::invalid_argument("boundary needs at least 3 distinct vertices");
  }
  if (!std::isfinite(jobs_index) || !std::isfinite(retail_index) ||
      (crime_index && !std::isfinite(*crime_index))) {
    throw std::invalid_argument("index values must be finite");
  }
  const double est = estimate_monthly_cost(pct_income_on_housing, median_annual_income);
  const BoundingBox box = bounding_box_of(boundary);
  return BlockGroup{std::move(id), std::move(boundary), pct_income_on_housing,
                    median_annual_income, jobs_index, retail_index, crime_index, est, box};
}

SchemaError::SchemaError(std::size_t line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

RowError::RowError(std::size_t row, std::size_t line, const std::string& what)
    : std::runtime_error("row " + std::to_string(row) + " (line " + std::to_string(line) +
                         "): " + what),
      row_(row),
      line_(line) {}

std::vector<Place> parse_places_csv(std::string_view content, const CategoryAliases& aliases) {
  const auto rows = read_rows(content);
  if (rows.empty()) throw SchemaError(1, "missing header");
  expect_header(rows[0], kPlaceHeader, true);

  std::vector<std::pair<std::size_t, OptionalColumn>> extra;
  for (std::size_t col = kPlaceHeader.size(); col < rows[0].fields.size(); ++col) {
    const auto name = trim(rows[0].fields[col]);
    auto it = std::find_if(kOptionalColumns.begin(), kOptionalColumns.end(),
                           [&](const auto& entry) { return entry.first == name; });
    if (it == kOptionalColumns.end()) {
      throw SchemaError(rows[0].line, "unknown column \"" + std::string(name) + "\"");
    }
    extra.emplace_back(col, it->second);
  }

  std::vector<Place> places;
  std::set<std::string> ids;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    auto fail = [&](const std::string& what) { throw RowError(r, row.line, what); };
    if (row.fields.size() != rows[0].fields.size()) {
      fail("expected " + std::to_string(rows[0].fields.size()) + " fields, got " +
           std::to_string(row.fields.size()));
    }
    const auto& f = row.fields;

    const std::string name(trim(f[0]));
    if (name.empty()) fail("empty place name");
    const auto raw_type = trim(f[1]);
    const auto category = aliases.resolve(raw_type);
    if (!category) fail("unknown place type \"" + std::string(raw_type) + "\"");
    const auto lat = parse_number(f[2]);
    const auto lon = parse_number(f[3]);
    if (!lat || !lon) fail("unparseable coordinate \"" + f[2] + "," + f[3] + "\"");
    std::optional<GeoPoint> location;
    try {
      location.emplace(*lat, *lon);
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }

    Place place{place_id(name, *location), name, *category, *location, std::string(trim(f[4])),
                optional_text(f[5]), optional_text(f[6]), std::nullopt, std::nullopt, {}};
    if (place.zipcode && (place.zipcode->size() != 5 ||
                          !std::all_of(place.zipcode->begin(), place.zipcode->end(),
                                       [](unsigned char c) { return std::isdigit(c); }))) {
      fail("zipcode \"" + *place.zipcode + "\" is not 5 digits");
    }
    if (*category == PlaceCategory::faith_center && category_from_name(lower(raw_type)) == std::nullopt) {
      place.faith_tradition = std::string(raw_type);
    }

    ApartmentDetails apartment;
    SchoolDetails school;
    for (const auto& [col, kind] : extra) {
      const std::string_view cell = trim(f[col]);
      if (cell.empty()) continue;
      auto number = [&]() {
        auto v = parse_number(cell);
        if (!v) fail("unparseable number \"" + std::string(cell) + "\"");
        return *v;
      };
      switch (kind) {
        case OptionalColumn::website: place.website = std::string(cell); break;
        case OptionalColumn::faith: place.faith_tradition = std::string(cell); break;
        case OptionalColumn::monthly_cost:
          apartment.monthly_cost = number();
          if (*apartment.monthly_cost <= 0.0) fail("monthly cost must be positive");
          break;
        case OptionalColumn::travel_minutes: apartment.travel_minutes = number(); break;
        case OptionalColumn::is_public: {
          const auto v = lower(cell);
          if (v == "true" || v == "yes" || v == "1" || v == "public") school.is_public = true;
          else if (v == "false" || v == "no" || v == "0" || v == "private") school.is_public = false;
          else fail("unparseable boolean \"" + std::string(cell) + "\"");
          break;
        }
        case OptionalColumn::lunch_pct:
          school.free_reduced_lunch_pct = number();
          if (*school.free_reduced_lunch_pct < 0.0 || *school.free_reduced_lunch_pct > 100.0) {
            fail("free/reduced lunch percentage outside [0,100]");
          }
          break;
        case OptionalColumn::rating: school.rating = number(); break;
      }
    }
    if (*category == PlaceCategory::apartment) place.details = apartment;
    else if (*category == PlaceCategory::school) place.details = school;

    if (!ids.insert(place.id).second) fail("duplicate place \"" + name + "\" at the same location");
    places.push_back(std::move(place));
  }
  return places;
}

std::string serialize_places_csv(std::span<const Place> places) {
  std::array<bool, kOptionalColumns.size()> used{};
  auto mark = [&](OptionalColumn c) { used[static_cast<std::size_t>(c)] = true; };
  for (const auto& p : places) {
    if (p.website) mark(OptionalColumn::website);
    if (p.faith_tradition) mark(OptionalColumn::faith);
    if (const auto* a = p.apartment()) {
      if (a->monthly_cost) mark(OptionalColumn::monthly_cost);
      if (a->travel_minutes) mark(OptionalColumn::travel_minutes);
    }
    if (const auto* s = p.school()) {
      if (s->is_public) mark(OptionalColumn::is_public);
      if (s->free_reduced_lunch_pct) mark(OptionalColumn::lunch_pct);
      if (s->rating) mark(OptionalColumn::rating);
    }
  }

  std::vector<std::string> header(kPlaceHeader.begin(), kPlaceHeader.end());
  for (std::size_t i = 0; i < kOptionalColumns.size(); ++i) {
    if (used[i]) header.emplace_back(kOptionalColumns[i].first);
  }
  std::string out = csv::join(header) + "\n";

  for (const auto& p : places) {
    std::vector<std::string> row = {p.name,
                                    std::string(to_string(p.category)),
                                    format_double(p.location.lat()),
                                    format_double(p.location.lon()),
                                    p.address,
                                    p.phone.value_or(""),
                                    p.zipcode.value_or("")};
    const auto* a = p.apartment();
    const auto* s = p.school();
    for (std::size_t i = 0; i < kOptionalColumns.size(); ++i) {
      if (!used[i]) continue;
      switch (kOptionalColumns[i].second) {
        case OptionalColumn::website: row.push_back(p.website.value_or("")); break;
        case OptionalColumn::faith: row.push_back(p.faith_tradition.value_or("")); break;
        case OptionalColumn::monthly_cost:
          row.push_back(a ? optional_number(a->monthly_cost) : "");
          break;
        case OptionalColumn::travel_minutes:
          row.push_back(a ? optional_number(a->travel_minutes) : "");
          break;
        case OptionalColumn::is_public:
          row.push_back(s && s->is_public ? (*s->is_public ? "true" : "false") : "");
          break;
        case OptionalColumn::lunch_pct:
          row.push_back(s ? optional_number(s->free_reduced_lunch_pct) : "");
          break;
        case OptionalColumn::rating: row.push_back(s ? optional_number(s->rating) : ""); break;
      }
    }
    out += csv::join(row) + "\n";
  }
  return out;
}

std::vector<BlockGroup> parse_blockgroups_csv(std::string_view content) {
  const auto rows = read_rows(content);
  if (rows.empty()) throw SchemaError(1, "missing header");
  expect_header(rows[0], kBlockGroupHeader, false);

  std::vector<BlockGroup> groups;
  std::set<std::string> ids;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    auto fail = [&](const std::string& what) { throw RowError(r, row.line, what); };
    if (row.fields.size() != kBlockGroupHeader.size()) {
      fail("expected 7 fields, got " + std::to_string(row.fields.size()));
    }
    const auto& f = row.fields;
    const std::string id(trim(f[0]));
    if (id.empty()) fail("empty GeoID");
    std::vector<GeoPoint> ring;
    try {
      ring = parse_ring(f[1]);
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
    if (ring.size() < 3 || distinct_vertex_count(ring) < 3) {
      fail("boundary needs at least 3 distinct vertices");
    }
    const auto pct = parse_number(f[2]);
    if (!pct) fail("unparseable PctIncomeHousing \"" + f[2] + "\"");
    if (!(*pct > 0.0 && *pct <= 1.0)) fail("PctIncomeHousing outside (0,1]");
    const auto income = parse_number(f[3]);
    if (!income || *income < 0.0) fail("MedianIncome must be a non-negative number");
    const auto jobs = parse_number(f[4]);
    const auto retail = parse_number(f[5]);
    if (!jobs || !retail) fail("unparseable JobsIndex/RetailIndex");
    std::optional<double> crime;
    if (!trim(f[6]).empty()) {
      crime = parse_number(f[6]);
      if (!crime) fail("unparseable CrimeIndex \"" + f[6] + "\"");
    }
    if (!ids.insert(id).second) fail("duplicate GeoID \"" + id + "\"");
    groups.push_back(BlockGroup::make(id, std::move(ring), *pct, *income, *jobs, *retail, crime));
  }
  return groups;
}

std::string serialize_blockgroups_csv(std::span<const BlockGroup> groups) {
  std::vector<std::string> header(kBlockGroupHeader.begin(), kBlockGroupHeader.end());
  std::string out = csv::join(header) + "\n";
  for (const auto& g : groups) {
    std::string ring;
    for (const auto& v : g.boundary) {
      if (!ring.empty()) ring += ';';
      ring += format_double(v.lat()) + " " + format_double(v.lon());
    }
    // The ring always contains a space, so it is always quoted.
    out += csv::join({g.id, ring, format_double(g.pct_income_on_housing),
                      format_double(g.median_annual_income), format_double(g.jobs_index),
                      format_double(g.retail_index), optional_number(g.crime_index)});
    out += "\n";
  }
  return out;
}

double estimate_monthly_cost(double pct_income_on_housing, double median_annual_income) {
  if (!std::isfinite(pct_income_on_housing) || pct_income_on_housing <= 0.0 ||
      pct_income_on_housing > 1.0) {
    throw std::invalid_argument("pct_income_on_housing must be in (0,1]");
  }
  if (!std::isfinite(median_annual_income) || median_annual_income < 0.0) {
    throw std::invalid_argument("median_annual_income must be non-negative");
  }
  return pct_income_on_housing * median_annual_income / 12.0;
}

std::vector<BlockGroup> filter_affordable(std::span<const BlockGroup> groups, double ceiling) {
  if (!(ceiling > 0.0)) throw std::invalid_argument("ceiling must be positive");
  std::vector<BlockGroup> kept;
  std::copy_if(groups.begin(), groups.end(), std::back_inserter(kept),
               [ceiling](const BlockGroup& g) { return g.est_monthly_cost <= ceiling; });
  return kept;
}

CatalogStats catalog_stats(std::span<const Place> apartments) {
  std::vector<double> costs;
  std::size_t unpriced = 0;
  for (const auto& p : apartments) {
    const auto* a = p.apartment();
    if (!a) continue;
    if (a->monthly_cost) costs.push_back(*a->monthly_cost);
    else ++unpriced;
  }
  if (costs.empty()) throw EmptyStatisticsError();

  std::sort(costs.begin(), costs.end());
  const std::size_t n = costs.size();
  const double median = n % 2 == 1 ? costs[n / 2] : (costs[n / 2 - 1] + costs[n / 2]) / 2.0;
  const double mean = std::accumulate(costs.begin(), costs.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double c : costs) ss += (c - mean) * (c - mean);
  return CatalogStats{n, unpriced, median, std::sqrt(ss / static_cast<double>(n))};
}

Catalog::Catalog(std::vector<Place> places, std::vector<BlockGroup> block_groups, GeoPoint anchor)
    : places_(std::move(places)), block_groups_(std::move(block_groups)), anchor_(anchor) {
  for (std::size_t i = 0; i < places_.size(); ++i) {
    auto& p = places_[i];
    if (p.id.empty() || p.name.empty()) throw std::invalid_argument("place needs an id and a name");
    if (!by_id_.emplace(p.id, i).second) {
      throw std::invalid_argument("duplicate place id \"" + p.id + "\"");
    }
    if (p.category == PlaceCategory::apartment) {
      if (!p.apartment()) p.details = ApartmentDetails{};
      auto& a = std::get<ApartmentDetails>(p.details);
      if (a.monthly_cost && !(std::isfinite(*a.monthly_cost) && *a.monthly_cost > 0.0)) {
        throw std::invalid_argument("monthly cost of \"" + p.id + "\" must be positive");
      }
      a.anchor_distance = haversine_distance(p.location, anchor_);
    }
  }
  std::sort(block_groups_.begin(), block_groups_.end(),
            [](const BlockGroup& a, const BlockGroup& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < block_groups_.size(); ++i) {
    if (block_groups_[i].id == block_groups_[i - 1].id) {
      throw std::invalid_argument("duplicate block group id \"" + block_groups_[i].id + "\"");
    }
  }
}

const Place* Catalog::find_place(std::string_view id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &places_[it->second];
}

std::vector<Place> Catalog::places_in(PlaceCategory c) const {
  std::vector<Place> out;
  std::copy_if(places_.begin(), places_.end(), std::back_inserter(out),
               [c](const Place& p) { return p.category == c; });
  return out;
}

Catalog Catalog::with_places(std::vector<Place> extra) const {
  std::vector<Place> all = places_;
  all.insert(all.end(), std::make_move_iterator(extra.begin()), std::make_move_iterator(extra.end()));
  return Catalog(std::move(all), block_groups_, anchor_);
}

const BlockGroup* block_group_containing(const Catalog& catalog, const GeoPoint& p) {
  for (const auto& g : catalog.block_groups()) {
    if (g.bbox.contains(p) && point_in_polygon(p, g.boundary)) return &g;
  }
  return nullptr;
}

}  // namespace scout
