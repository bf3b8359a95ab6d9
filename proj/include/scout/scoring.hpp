#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "scout/catalog.hpp"
#include "scout/geo.hpp"
#include "scout/spatial_index.hpp"

namespace scout {

inline constexpr double kDefaultRasterCellSize = 0.005;

enum class CriterionId {
  affordability,
  jobs,
  retail,
  crime,
  prox_transit,
  prox_schools,
  prox_markets,
  prox_anchor,
};

inline constexpr std::size_t kCriterionCount = 8;

inline constexpr std::array<CriterionId, kCriterionCount> kAllCriteria = {
    CriterionId::affordability, CriterionId::jobs,         CriterionId::retail,
    CriterionId::crime,         CriterionId::prox_transit, CriterionId::prox_schools,
    CriterionId::prox_markets,  CriterionId::prox_anchor,
};

std::string_view to_string(CriterionId c);
std::optional<CriterionId> criterion_from_name(std::string_view name);

inline bool is_area_criterion(CriterionId c) {
  return static_cast<std::size_t>(c) < static_cast<std::size_t>(CriterionId::prox_transit);
}

/// Invalid weight input. `field()` names the offending criterion, or is empty
/// when the vector as a whole is at fault (all zero).
class WeightError : public std::invalid_argument {
 public:
  WeightError(std::string field, const std::string& what)
      : std::invalid_argument(what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Non-negative, finite criterion weights with at least one positive entry.
///
/// Only ratios matter. On construction every weight is resolved to an
/// integer number of 2^-32 steps of the largest weight, so multiplying all
/// weights by a constant yields the same resolved vector and therefore
/// bit-identical scores.
class WeightVector {
 public:
  explicit WeightVector(const std::array<double, kCriterionCount>& weights);
  static WeightVector one_hot(CriterionId c);

  double raw(CriterionId c) const { return raw_[static_cast<std::size_t>(c)]; }
  /// Resolved integer weight in [0, 2^32].
  double resolved(CriterionId c) const { return resolved_[static_cast<std::size_t>(c)]; }
  double resolved_total() const { return resolved_total_; }

 private:
  std::array<double, kCriterionCount> raw_;
  std::array<double, kCriterionCount> resolved_;
  double resolved_total_;
};

/// Linear-decay cutoffs in meters for the proximity criteria.
struct ProximityConfig {
  double transit = kMileMeters;
  double schools = kMileMeters;
  double markets = 2.0 * kMileMeters;
  double anchor = 10.0 * kMileMeters;

  double d_max(CriterionId c) const;
  void validate() const;
};

/// Hazen plotting positions (r - 0.5) / n, ties get their group's mean rank.
/// Output is aligned with the input. Throws on empty or non-finite input.
std::vector<double> hazen_percentiles(std::span<const double> values);

/// Keyed form of hazen_percentiles. Ids must be unique.
std::map<std::string, double> percentile_scores(
    std::span<const std::pair<std::string, double>> values);

/// Per area criterion, block-group id -> percentile score with the
/// better-is-higher direction applied (cheaper and safer score higher).
class PercentileTable {
 public:
  PercentileTable() = default;
  explicit PercentileTable(const Catalog& catalog);

  std::optional<double> lookup(CriterionId c, std::string_view block_group_id) const;
  /// Raw attribute value feeding the table (before direction adjustment).
  static std::optional<double> raw_value(CriterionId c, const BlockGroup& g);

 private:
  std::array<std::map<std::string, double, std::less<>>, 4> tables_;
};

/// max(0, 1 - distance / d_max).
double proximity_score(double distance, double d_max);

using CriterionScores = std::array<std::optional<double>, kCriterionCount>;

struct CriterionBreakdown {
  std::optional<double> score;
  double effective_weight = 0.0;

  friend bool operator==(const CriterionBreakdown&, const CriterionBreakdown&) = default;
};

struct ScoreBreakdown {
  std::optional<double> composite;
  std::array<CriterionBreakdown, kCriterionCount> criteria;
  double completeness = 0.0;

  const CriterionBreakdown& operator[](CriterionId c) const {
    return criteria[static_cast<std::size_t>(c)];
  }
  friend bool operator==(const ScoreBreakdown&, const ScoreBreakdown&) = default;
};

/// Everything a score depends on besides the point and the weights.
struct ScoringContext {
  const Catalog& catalog;
  const PlaceIndex& index;
  const PercentileTable& tables;
  ProximityConfig proximity;
};

std::optional<double> criterion_score(const ScoringContext& ctx, const GeoPoint& p, CriterionId c);
CriterionScores criterion_scores(const ScoringContext& ctx, const GeoPoint& p);

/// Weighted mean over criteria that have a score and a positive weight.
ScoreBreakdown combine_scores(const CriterionScores& scores, const WeightVector& weights);
ScoreBreakdown composite_score(const ScoringContext& ctx, const GeoPoint& p,
                               const WeightVector& weights);

/// Composite score at every cell center. `threads == 0` picks the hardware
/// concurrency; the result does not depend on the thread count.
RasterGrid score_raster(const ScoringContext& ctx, const GridSpec& spec,
                        const WeightVector& weights, unsigned threads = 0);

struct RankedApartment {
  std::string id;
  std::string name;
  std::size_t rank;  // 1-based
  ScoreBreakdown breakdown;
};

/// Scores each apartment at its location. An apartment with its own monthly
/// cost uses the percentile of that cost among the priced apartments in
/// `apartments` for affordability. Order: composite desc, completeness desc,
/// name, id; apartments without a composite come last.
std::vector<RankedApartment> rank_apartments(const ScoringContext& ctx,
                                             std::span<const Place> apartments,
                                             const WeightVector& weights);

}  // namespace scout
