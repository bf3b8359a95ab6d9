#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "scout/catalog.hpp"
#include "scout/geo.hpp"

namespace scout {

inline constexpr double kMinFormRent = 500.0;
inline constexpr double kMaxFormRent = 2000.0;

/// A rejected field of a user submission.
class SubmissionError : public std::invalid_argument {
 public:
  SubmissionError(std::string field, const std::string& what)
      : std::invalid_argument(what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// The pending/archived/rejected tree could not be read or written.
class StorageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A user-contributed apartment listing. Use make() to build one: it trims
/// fields, strips the 0x1F separator byte and enforces the mandatory fields.
struct Submission {
  std::string name;
  std::string address;
  std::optional<std::string> phone;
  std::optional<std::string> website;
  std::optional<double> monthly_rent;

  static Submission make(std::string_view name, std::string_view address,
                         std::optional<std::string_view> phone = std::nullopt,
                         std::optional<std::string_view> website = std::nullopt,
                         std::optional<double> monthly_rent = std::nullopt);

  friend bool operator==(const Submission&, const Submission&) = default;
};

/// name, address, phone, website, rent ("%.2f") joined by 0x1F.
std::string canonical_bytes(const Submission& s);

/// Compact ISO-8601 UTC, e.g. 20160925T143000Z.
std::string format_timestamp(std::chrono::system_clock::time_point t);

/// "<timestamp>-<md5 of canonical_bytes>.csv"
std::string submission_filename(const Submission& s, std::chrono::system_clock::time_point now);

std::string serialize_submission_csv(const Submission& s);
Submission parse_submission_csv(std::string_view content);

class Geocoder {
 public:
  virtual ~Geocoder() = default;
  virtual std::optional<GeoPoint> geocode(std::string_view address) const = 0;
};

/// Fixed lookup table, keyed on trimmed case-folded address.
class TableGeocoder final : public Geocoder {
 public:
  /// CSV with header "address,lat,lon".
  static TableGeocoder parse_csv(std::string_view content);

  void add(std::string_view address, const GeoPoint& location);
  std::optional<GeoPoint> geocode(std::string_view address) const override;

 private:
  std::map<std::string, GeoPoint> table_;
};

struct MergeEntry {
  enum class Outcome { added, duplicate, rejected };

  std::string filename;
  Outcome outcome;
  std::string place_id;  // empty when rejected
  std::string reason;    // empty when added
};

std::string_view to_string(MergeEntry::Outcome o);

struct MergeReport {
  std::vector<MergeEntry> entries;

  std::size_t count(MergeEntry::Outcome o) const;
};

/// Files submissions under <root>/pending and folds them into a catalog.
/// Processed files move to <root>/archived; unusable ones to <root>/rejected
/// together with a "<file>.reason.txt" note.
class SubmissionStore {
 public:
  explicit SubmissionStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path pending_dir() const { return root_ / "pending"; }
  std::filesystem::path archived_dir() const { return root_ / "archived"; }
  std::filesystem::path rejected_dir() const { return root_ / "rejected"; }

  /// Writes one CSV file and returns its name. Saving identical content in
  /// the same second rewrites the same file.
  std::string save(const Submission& s, std::chrono::system_clock::time_point now);

  /// Pending file names in ascending order.
  std::vector<std::string> pending() const;

  /// Geocodes every pending file in name order and appends the resulting
  /// apartments to a copy of `catalog`. Never aborts on a bad file.
  std::pair<Catalog, MergeReport> merge_pending(const Catalog& catalog, const Geocoder& geocoder);

 private:
  std::filesystem::path root_;
  // Writers (save and merge) take this; listing does not.
  std::mutex write_mutex_;
};

}  // namespace scout
