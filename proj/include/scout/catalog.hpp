#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "scout/geo.hpp"

namespace scout {

inline constexpr double kDefaultAffordabilityCeiling = 3000.0;

enum class PlaceCategory {
  apartment,
  transit_stop,
  school,
  market,
  faith_center,
  esl,
  daycare,
  health,
  hospital,
  dds_office,
  dfcs_office,
  ssn_office,
};

inline constexpr std::array kAllCategories = {
    PlaceCategory::apartment,  PlaceCategory::transit_stop, PlaceCategory::school,
    PlaceCategory::market,     PlaceCategory::faith_center, PlaceCategory::esl,
    PlaceCategory::daycare,    PlaceCategory::health,       PlaceCategory::hospital,
    PlaceCategory::dds_office, PlaceCategory::dfcs_office,  PlaceCategory::ssn_office,
};

std::string_view to_string(PlaceCategory c);
/// Canonical snake_case names only; aliases go through CategoryAliases.
std::optional<PlaceCategory> category_from_name(std::string_view name);

/// Raw place-type strings ("Real estate", "synagogue", ...) to categories.
/// Lookup is case-insensitive on trimmed text. Canonical names always resolve.
class CategoryAliases {
 public:
  /// Built-in table covering the Places export vocabulary.
  static CategoryAliases defaults();
  /// Two-column CSV with header "raw,category".
  static CategoryAliases parse_csv(std::string_view content);

  /// Entries of `other` override entries already present.
  void merge(const CategoryAliases& other);
  std::optional<PlaceCategory> resolve(std::string_view raw) const;
  std::size_t size() const { return table_.size(); }

 private:
  std::map<std::string, PlaceCategory> table_;
};

struct ApartmentDetails {
  std::optional<double> monthly_cost;     // USD/month, > 0
  std::optional<double> anchor_distance;  // meters, set by Catalog
  std::optional<double> travel_minutes;   // passed through from the listing file

  friend bool operator==(const ApartmentDetails&, const ApartmentDetails&) = default;
};

struct SchoolDetails {
  std::optional<bool> is_public;
  std::optional<double> free_reduced_lunch_pct;  // [0,100]
  std::optional<double> rating;

  friend bool operator==(const SchoolDetails&, const SchoolDetails&) = default;
};

struct Place {
  std::string id;
  std::string name;
  PlaceCategory category;
  GeoPoint location;
  std::string address;
  std::optional<std::string> phone;
  std::optional<std::string> zipcode;
  std::optional<std::string> website;
  std::optional<std::string> faith_tradition;
  std::variant<std::monostate, ApartmentDetails, SchoolDetails> details;

  const ApartmentDetails* apartment() const { return std::get_if<ApartmentDetails>(&details); }
  const SchoolDetails* school() const { return std::get_if<SchoolDetails>(&details); }

  friend bool operator==(const Place&, const Place&) = default;
};

/// Deterministic id from name and coordinates (6 decimal places).
std::string place_id(std::string_view name, const GeoPoint& location);

struct BlockGroup {
  std::string id;
  std::vector<GeoPoint> boundary;
  double pct_income_on_housing;  // (0,1]
  double median_annual_income;   // USD/year
  double jobs_index;
  double retail_index;
  std::optional<double> crime_index;
  double est_monthly_cost;  // derived
  BoundingBox bbox;         // derived

  /// Validates inputs and fills the derived fields.
  static BlockGroup make(std::string id, std::vector<GeoPoint> boundary, double pct_income_on_housing,
                         double median_annual_income, double jobs_index, double retail_index,
                         std::optional<double> crime_index);
};

/// Thrown when a CSV header does not match the expected schema.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Thrown for a malformed data row. `row` is the 1-based data row index.
class RowError : public std::runtime_error {
 public:
  RowError(std::size_t row, std::size_t line, const std::string& what);
  std::size_t row() const { return row_; }
  std::size_t line() const { return line_; }

 private:
  std::size_t row_;
  std::size_t line_;
};

class EmptyStatisticsError : public std::runtime_error {
 public:
  EmptyStatisticsError() : std::runtime_error("no apartments with a monthly cost") {}
};

std::vector<Place> parse_places_csv(std::string_view content,
                                    const CategoryAliases& aliases = CategoryAliases::defaults());
std::string serialize_places_csv(std::span<const Place> places);

std::vector<BlockGroup> parse_blockgroups_csv(std::string_view content);
std::string serialize_blockgroups_csv(std::span<const BlockGroup> groups);

/// pct_income_on_housing * median_annual_income / 12.
double estimate_monthly_cost(double pct_income_on_housing, double median_annual_income);

/// Keeps groups with est_monthly_cost <= ceiling, in input order.
std::vector<BlockGroup> filter_affordable(std::span<const BlockGroup> groups,
                                          double ceiling = kDefaultAffordabilityCeiling);

struct CatalogStats {
  std::size_t count;     // apartments with a monthly cost
  std::size_t unpriced;  // apartments without one, excluded from the moments
  double median_cost;
  double stddev_cost;  // population
};

/// Median (midpoint for even counts) and population standard deviation of
/// monthly costs. Non-apartment places are ignored.
CatalogStats catalog_stats(std::span<const Place> apartments);

/// Immutable snapshot of places and block groups around an anchor point.
class Catalog {
 public:
  Catalog(std::vector<Place> places, std::vector<BlockGroup> block_groups, GeoPoint anchor);

  const std::vector<Place>& places() const { return places_; }
  /// Sorted by ascending id.
  const std::vector<BlockGroup>& block_groups() const { return block_groups_; }
  const GeoPoint& anchor() const { return anchor_; }

  const Place* find_place(std::string_view id) const;
  std::vector<Place> places_in(PlaceCategory c) const;

  /// New snapshot with `extra` appended after the existing places.
  Catalog with_places(std::vector<Place> extra) const;

 private:
  std::vector<Place> places_;
  std::vector<BlockGroup> block_groups_;
  GeoPoint anchor_;
  std::map<std::string, std::size_t, std::less<>> by_id_;
};

/// Lowest-id block group whose boundary contains p.
const BlockGroup* block_group_containing(const Catalog& catalog, const GeoPoint& p);

}  // namespace scout
