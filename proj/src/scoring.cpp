#include "scout/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

namespace scout {

namespace {

constexpr std::array<std::string_view, kCriterionCount> kCriterionNames = {
    "affordability", "jobs",         "retail",       "crime",
    "prox_transit",  "prox_schools", "prox_markets", "prox_anchor",
};

constexpr double kWeightSteps = 4294967296.0;  // 2^32

std::size_t slot(CriterionId c) { return static_cast<std::size_t>(c); }

std::optional<PlaceCategory> proximity_category(CriterionId c) {
  switch (c) {
    case CriterionId::prox_transit: return PlaceCategory::transit_stop;
    case CriterionId::prox_schools: return PlaceCategory::school;
    case CriterionId::prox_markets: return PlaceCategory::market;
    default: return std::nullopt;
  }
}

// Higher-is-better orientation of each area attribute.
double oriented(CriterionId c, double raw) {
  return c == CriterionId::affordability || c == CriterionId::crime ? -raw : raw;
}

}  // namespace

std::string_view to_string(CriterionId c) { return kCriterionNames[slot(c)]; }

std::optional<CriterionId> criterion_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kCriterionNames.size(); ++i) {
    if (kCriterionNames[i] == name) return static_cast<CriterionId>(i);
  }
  return std::nullopt;
}

WeightVector::WeightVector(const std::array<double, kCriterionCount>& weights) : raw_(weights) {
  double max_weight = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double w = weights[i];
    const std::string name(kCriterionNames[i]);
    if (!std::isfinite(w)) throw WeightError(name, "weight for " + name + " is not finite");
    if (w < 0.0) throw WeightError(name, "weight for " + name + " is negative");
    max_weight = std::max(max_weight, w);
  }
  if (max_weight == 0.0) throw WeightError("", "at least one weight must be positive");
  resolved_total_ = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    resolved_[i] = std::round(weights[i] / max_weight * kWeightSteps);
    resolved_total_ += resolved_[i];
  }
}

WeightVector WeightVector::one_hot(CriterionId c) {
  std::array<double, kCriterionCount> w{};
  w[slot(c)] = 1.0;
  return WeightVector(w);
}

double ProximityConfig::d_max(CriterionId c) const {
  switch (c) {
    case CriterionId::prox_transit: return transit;
    case CriterionId::prox_schools: return schools;
    case CriterionId::prox_markets: return markets;
    case CriterionId::prox_anchor: return anchor;
    default: throw std::invalid_argument("not a proximity criterion: " + std::string(to_string(c)));
  }
}

void ProximityConfig::validate() const {
  for (double d : {transit, schools, markets, anchor}) {
    if (!std::isfinite(d) || d <= 0.0) throw std::invalid_argument("d_max must be positive");
  }
}

std::vector<double> hazen_percentiles(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("percentiles of an empty list");
  const std::size_t n = values.size();
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("percentile input is not finite");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  std::vector<double> out(n);
  std::size_t first = 0;
  while (first < n) {
    std::size_t last = first;
    while (last + 1 < n && values[order[last + 1]] == values[order[first]]) ++last;
    // 1-based ranks first+1 .. last+1 share their mean.
    const double rank = (static_cast<double>(first + 1) + static_cast<double>(last + 1)) / 2.0;
    const double score = (rank - 0.5) / static_cast<double>(n);
    for (std::size_t k = first; k <= last; ++k) out[order[k]] = score;
    first = last + 1;
  }
  return out;
}

std::map<std::string, double> percentile_scores(
    std::span<const std::pair<std::string, double>> values) {
  std::vector<double> raw;
  raw.reserve(values.size());
  for (const auto& [id, v] : values) raw.push_back(v);
  const auto scores = hazen_percentiles(raw);
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!out.emplace(values[i].first, scores[i]).second) {
      throw std::invalid_argument("duplicate id \"" + values[i].first + "\"");
    }
  }
  return out;
}

std::optional<double> PercentileTable::raw_value(CriterionId c, const BlockGroup& g) {
  switch (c) {
    case CriterionId::affordability: return g.est_monthly_cost;
    case CriterionId::jobs: return g.jobs_index;
    case CriterionId::retail: return g.retail_index;
    case CriterionId::crime: return g.crime_index;
    default: throw std::invalid_argument("not an area criterion: " + std::string(to_string(c)));
  }
}

PercentileTable::PercentileTable(const Catalog& catalog) {
  for (std::size_t i = 0; i < tables_.size(); ++i) {
    const auto c = static_cast<CriterionId>(i);
    std::vector<std::pair<std::string, double>> values;
    for (const auto& g : catalog.block_groups()) {
      if (auto v = raw_value(c, g)) values.emplace_back(g.id, oriented(c, *v));
    }
    if (values.empty()) continue;
    for (auto& [id, score] : percentile_scores(values)) tables_[i].emplace(id, score);
  }
}

std::optional<double> PercentileTable::lookup(CriterionId c, std::string_view block_group_id) const {
  if (!is_area_criterion(c)) return std::nullopt;
  const auto& table = tables_[slot(c)];
  auto it = table.find(block_group_id);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

double proximity_score(double distance, double d_max) {
  return std::max(0.0, 1.0 - distance / d_max);
}

std::optional<double> criterion_score(const ScoringContext& ctx, const GeoPoint& p, CriterionId c) {
  if (is_area_criterion(c)) {
    const BlockGroup* g = block_group_containing(ctx.catalog, p);
    if (!g) return std::nullopt;
    return ctx.tables.lookup(c, g->id);
  }
  if (c == CriterionId::prox_anchor) {
    return proximity_score(haversine_distance(p, ctx.catalog.anchor()), ctx.proximity.anchor);
  }
  const auto hit = ctx.index.nearest(p, *proximity_category(c));
  if (!hit) return std::nullopt;
  return proximity_score(hit->distance, ctx.proximity.d_max(c));
}

CriterionScores criterion_scores(const ScoringContext& ctx, const GeoPoint& p) {
  CriterionScores scores;
  // One polygon lookup serves all four area criteria.
  const BlockGroup* g = block_group_containing(ctx.catalog, p);
  for (auto c : kAllCriteria) {
    if (is_area_criterion(c)) {
      scores[slot(c)] = g ? ctx.tables.lookup(c, g->id) : std::nullopt;
    } else {
      scores[slot(c)] = criterion_score(ctx, p, c);
    }
  }
  return scores;
}

ScoreBreakdown combine_scores(const CriterionScores& scores, const WeightVector& weights) {
  ScoreBreakdown out;
  double available = 0.0;
  for (auto c : kAllCriteria) {
    out.criteria[slot(c)].score = scores[slot(c)];
    if (scores[slot(c)] && weights.resolved(c) > 0.0) available += weights.resolved(c);
  }
  if (available == 0.0) return out;

  double composite = 0.0;
  for (auto c : kAllCriteria) {
    auto& entry = out.criteria[slot(c)];
    if (!entry.score || weights.resolved(c) == 0.0) continue;
    entry.effective_weight = weights.resolved(c) / available;
    composite += *entry.score * entry.effective_weight;
  }
  out.composite = std::clamp(composite, 0.0, 1.0);
  out.completeness = available / weights.resolved_total();
  return out;
}

ScoreBreakdown composite_score(const ScoringContext& ctx, const GeoPoint& p,
                               const WeightVector& weights) {
  return combine_scores(criterion_scores(ctx, p), weights);
}

RasterGrid score_raster(const ScoringContext& ctx, const GridSpec& spec,
                        const WeightVector& weights, unsigned threads) {
  RasterGrid grid(spec);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, spec.rows));

  // Each worker owns a disjoint band of rows.
  auto fill_rows = [&](std::size_t row_begin, std::size_t row_end) {
    for (std::size_t r = row_begin; r < row_end; ++r) {
      for (std::size_t c = 0; c < spec.cols; ++c) {
        const auto b = composite_score(ctx, cell_center(spec, r, c), weights);
        grid.set(r, c, b.composite ? *b.composite : RasterGrid::kMissing);
      }
    }
  };
  if (threads <= 1) {
    fill_rows(0, spec.rows);
    return grid;
  }
  std::vector<std::jthread> workers;
  const std::size_t band = (spec.rows + threads - 1) / threads;
  for (std::size_t begin = 0; begin < spec.rows; begin += band) {
    workers.emplace_back(fill_rows, begin, std::min(spec.rows, begin + band));
  }
  workers.clear();
  return grid;
}

std::vector<RankedApartment> rank_apartments(const ScoringContext& ctx,
                                             std::span<const Place> apartments,
                                             const WeightVector& weights) {
  std::vector<std::pair<std::string, double>> priced;
  for (const auto& a : apartments) {
    if (const auto* d = a.apartment(); d && d->monthly_cost) priced.emplace_back(a.id, -*d->monthly_cost);
  }
  std::map<std::string, double> own_cost;
  if (!priced.empty()) own_cost = percentile_scores(priced);

  std::vector<RankedApartment> ranked;
  ranked.reserve(apartments.size());
  for (const auto& a : apartments) {
    auto scores = criterion_scores(ctx, a.location);
    if (auto it = own_cost.find(a.id); it != own_cost.end()) {
      scores[slot(CriterionId::affordability)] = it->second;
    }
    ranked.push_back(RankedApartment{a.id, a.name, 0, combine_scores(scores, weights)});
  }

  std::sort(ranked.begin(), ranked.end(), [](const RankedApartment& x, const RankedApartment& y) {
    const auto& bx = x.breakdown;
    const auto& by = y.breakdown;
    if (bx.composite.has_value() != by.composite.has_value()) return bx.composite.has_value();
    if (bx.composite && *bx.composite != *by.composite) return *bx.composite > *by.composite;
    if (bx.completeness != by.completeness) return bx.completeness > by.completeness;
    if (x.name != y.name) return x.name < y.name;
    return x.id < y.id;
  });
  for (std::size_t i = 0; i < ranked.size(); ++i) ranked[i].rank = i + 1;
  return ranked;
}

}  // namespace scout
