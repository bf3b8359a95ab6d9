#include "scout/submission.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "scout/csv.hpp"
#include "scout/digest.hpp"

namespace scout {

namespace fs = std::filesystem;

namespace {

constexpr char kSeparator = '\x1f';
constexpr std::string_view kSubmissionHeader =
    "Apartment Name,Apartment Address,Apartment Phone,Apartment Website,Average Rent";

std::string clean(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c != kSeparator) out.push_back(c);
  }
  const auto first = out.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = out.find_last_not_of(" \t\r\n");
  return out.substr(first, last - first + 1);
}

std::optional<std::string> clean_optional(std::optional<std::string_view> s) {
  if (!s) return std::nullopt;
  auto v = clean(*s);
  if (v.empty()) return std::nullopt;
  return v;
}

std::string format_rent(double rent) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", rent);
  return buf;
}

std::string fold(std::string_view s) {
  std::string out = clean(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::optional<double> parse_number(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StorageError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomically(const fs::path& path, std::string_view content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw StorageError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw StorageError("short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw StorageError("cannot rename " + tmp.string() + ": " + ec.message());
}

void move_file(const fs::path& from, const fs::path& to) {
  std::error_code ec;
  fs::rename(from, to, ec);
  if (ec) throw StorageError("cannot move " + from.string() + ": " + ec.message());
}

}  // namespace

Submission Submission::make(std::string_view name, std::string_view address,
                            std::optional<std::string_view> phone,
                            std::optional<std::string_view> website,
                            std::optional<double> monthly_rent) {
  Submission s{clean(name), clean(address), clean_optional(phone), clean_optional(website),
               monthly_rent};
  if (s.name.empty()) throw SubmissionError("name", "apartment name is required");
  if (s.address.empty()) throw SubmissionError("address", "apartment address is required");
  if (monthly_rent) {
    if (!std::isfinite(*monthly_rent) || *monthly_rent < kMinFormRent ||
        *monthly_rent > kMaxFormRent) {
      throw SubmissionError("rent", "average rent must be between 500 and 2000");
    }
  }
  return s;
}

std::string canonical_bytes(const Submission& s) {
  std::string out = s.name;
  out += kSeparator;
  out += s.address;
  out += kSeparator;
  out += s.phone.value_or("");
  out += kSeparator;
  out += s.website.value_or("");
  out += kSeparator;
  if (s.monthly_rent) out += format_rent(*s.monthly_rent);
  return out;
}

std::string format_timestamp(std::chrono::system_clock::time_point t) {
  const std::time_t secs = std::chrono::system_clock::to_time_t(
      std::chrono::floor<std::chrono::seconds>(t));
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

std::string submission_filename(const Submission& s, std::chrono::system_clock::time_point now) {
  return format_timestamp(now) + "-" + md5_hex(canonical_bytes(s)) + ".csv";
}

std::string serialize_submission_csv(const Submission& s) {
  std::string out(kSubmissionHeader);
  out += "\n";
  out += csv::join({s.name, s.address, s.phone.value_or(""), s.website.value_or(""),
                    s.monthly_rent ? format_rent(*s.monthly_rent) : ""});
  out += "\n";
  return out;
}

Submission parse_submission_csv(std::string_view content) {
  const auto rows = csv::parse(content);
  if (rows.empty() || csv::join(rows[0].fields) != kSubmissionHeader) {
    throw std::invalid_argument("missing submission header");
  }
  if (rows.size() != 2) throw std::invalid_argument("expected exactly one data row");
  const auto& f = rows[1].fields;
  if (f.size() != 5) throw std::invalid_argument("expected 5 fields");
  std::optional<double> rent;
  if (!f[4].empty()) {
    rent = parse_number(f[4]);
    if (!rent) throw std::invalid_argument("unparseable rent \"" + f[4] + "\"");
  }
  return Submission::make(f[0], f[1], f[2], f[3], rent);
}

TableGeocoder TableGeocoder::parse_csv(std::string_view content) {
  const auto rows = csv::parse(content);
  if (rows.empty() || csv::join(rows[0].fields) != "address,lat,lon") {
    throw std::invalid_argument("geocoder table needs header \"address,lat,lon\"");
  }
  TableGeocoder g;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i].fields;
    const auto lat = f.size() == 3 ? parse_number(f[1]) : std::nullopt;
    const auto lon = f.size() == 3 ? parse_number(f[2]) : std::nullopt;
    if (!lat || !lon) {
      throw std::invalid_argument("geocoder table line " + std::to_string(rows[i].line) +
                                  " is malformed");
    }
    g.add(f[0], GeoPoint(*lat, *lon));
  }
  return g;
}

void TableGeocoder::add(std::string_view address, const GeoPoint& location) {
  table_.insert_or_assign(fold(address), location);
}

std::optional<GeoPoint> TableGeocoder::geocode(std::string_view address) const {
  auto it = table_.find(fold(address));
  if (it == table_.end()) return std::nullopt;
  return it->second;
}

std::string_view to_string(MergeEntry::Outcome o) {
  switch (o) {
    case MergeEntry::Outcome::added: return "added";
    case MergeEntry::Outcome::duplicate: return "duplicate";
    case MergeEntry::Outcome::rejected: return "rejected";
  }
  return "unknown";
}

std::size_t MergeReport::count(MergeEntry::Outcome o) const {
  return static_cast<std::size_t>(std::count_if(
      entries.begin(), entries.end(), [o](const MergeEntry& e) { return e.outcome == o; }));
}

SubmissionStore::SubmissionStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  for (const auto& dir : {pending_dir(), archived_dir(), rejected_dir()}) {
    fs::create_directories(dir, ec);
    if (ec) throw StorageError("cannot create " + dir.string() + ": " + ec.message());
  }
}

std::string SubmissionStore::save(const Submission& s, std::chrono::system_clock::time_point now) {
  const std::string name = submission_filename(s, now);
  std::lock_guard lock(write_mutex_);
  write_file_atomically(pending_dir() / name, serialize_submission_csv(s));
  return name;
}

std::vector<std::string> SubmissionStore::pending() const {
  std::vector<std::string> names;
  std::error_code ec;
  for (fs::directory_iterator it(pending_dir(), ec), end; !ec && it != end; it.increment(ec)) {
    if (it->is_regular_file() && it->path().extension() == ".csv") {
      names.push_back(it->path().filename().string());
    }
  }
  if (ec) throw StorageError("cannot list " + pending_dir().string() + ": " + ec.message());
  std::sort(names.begin(), names.end());
  return names;
}

std::pair<Catalog, MergeReport> SubmissionStore::merge_pending(const Catalog& catalog,
                                                               const Geocoder& geocoder) {
  std::lock_guard lock(write_mutex_);
  MergeReport report;
  std::vector<Place> added;
  std::set<std::string> batch_ids;

  for (const auto& name : pending()) {
    const fs::path path = pending_dir() / name;
    auto reject = [&](const std::string& reason) {
      move_file(path, rejected_dir() / name);
      write_file_atomically(rejected_dir() / (name + ".reason.txt"), reason + "\n");
      report.entries.push_back({name, MergeEntry::Outcome::rejected, "", reason});
    };

    std::optional<Submission> s;
    try {
      s = parse_submission_csv(read_file(path));
    } catch (const std::exception& e) {
      reject(std::string("unparseable submission: ") + e.what());
      continue;
    }
    const auto location = geocoder.geocode(s->address);
    if (!location) {
      reject("address could not be geocoded: " + s->address);
      continue;
    }

    const std::string id = place_id(s->name, *location);
    if (catalog.find_place(id) || batch_ids.count(id)) {
      move_file(path, archived_dir() / name);
      report.entries.push_back({name, MergeEntry::Outcome::duplicate, id, "already listed"});
      continue;
    }
    Place apartment{id,
                    s->name,
                    PlaceCategory::apartment,
                    *location,
                    s->address,
                    s->phone,
                    std::nullopt,
                    s->website,
                    std::nullopt,
                    ApartmentDetails{s->monthly_rent, std::nullopt, std::nullopt}};
    added.push_back(std::move(apartment));
    batch_ids.insert(id);
    move_file(path, archived_dir() / name);
    report.entries.push_back({name, MergeEntry::Outcome::added, id, ""});
  }
  return {catalog.with_places(std::move(added)), std::move(report)};
}

}  // namespace scout
