#include "hotspot/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "hotspot/csv.hpp"
#include "hotspot/error.hpp"

namespace hotspot {
namespace {

constexpr std::array<std::string_view, kCrimeTypeCount> kNames = {
    "ROBBERY", "THEFT",   "BURGLARY", "MOTOR VEHICLE THEFT",
    "ASSAULT", "CRIMINAL SEXUAL ASSAULT", "ARSON", "HOMICIDE",
};

constexpr std::array<std::string_view, kCrimeTypeCount> kCodes = {
    "RO", "TH", "BU", "MO", "AS", "CR", "AR", "HO",
};

std::size_t find_column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (csv::trim(header[i]) == name) return i;
  }
  fail(ErrorKind::Config, "required column '" + name + "' not found in header");
}

bool usable(const RawRow& row, const IngestConfig& config) {
  if (!row.year || !row.latitude || !row.longitude) return false;
  if (csv::trim(row.primary_type).empty()) return false;
  if (*row.year < config.years.first || *row.year > config.years.last) return false;
  const double lat = *row.latitude;
  const double lon = *row.longitude;
  if (!(lat >= -90.0 && lat <= 90.0) || !(lon >= -180.0 && lon <= 180.0)) return false;
  // (0, 0) is the portal's sentinel for ungeolocated rows.
  if (lat == 0.0 && lon == 0.0) return false;
  return true;
}

}  // namespace

std::string_view canonical_name(CrimeType t) { return kNames[index_of(t)]; }

std::string_view short_code(CrimeType t) { return kCodes[index_of(t)]; }

std::optional<CrimeType> crime_type_from_name(std::string_view name) {
  const std::string key = normalize_key(name);
  for (CrimeType t : kAllCrimeTypes) {
    if (canonical_name(t) == key) return t;
  }
  return std::nullopt;
}

std::string normalize_key(std::string_view raw) {
  std::string key(csv::trim(raw));
  std::transform(key.begin(), key.end(), key.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return key;
}

AliasTable AliasTable::portal_defaults() {
  AliasTable table;
  for (CrimeType t : kAllCrimeTypes) table.add(canonical_name(t), t);
  table.add("CRIM SEXUAL ASSAULT", CrimeType::CriminalSexualAssault);
  return table;
}

void AliasTable::add(std::string_view raw, CrimeType type) {
  entries_[normalize_key(raw)] = type;
}

std::optional<CrimeType> AliasTable::lookup(std::string_view raw) const {
  const auto it = entries_.find(normalize_key(raw));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::optional<CrimeType> normalize_crime_type(std::string_view raw,
                                              const AliasTable& table) {
  return table.lookup(raw);
}

IngestResult parse_incidents(std::istream& source, const IngestConfig& config) {
  csv::Reader reader(source);
  std::vector<std::string> fields;
  if (!reader.next(fields)) {
    fail(ErrorKind::Config, "input has no header row");
  }
  const std::size_t c_year = find_column(fields, config.columns.year);
  const std::size_t c_type = find_column(fields, config.columns.primary_type);
  const std::size_t c_lat = find_column(fields, config.columns.latitude);
  const std::size_t c_lon = find_column(fields, config.columns.longitude);
  const std::size_t needed = std::max({c_year, c_type, c_lat, c_lon}) + 1;

  IngestResult result;
  while (reader.next(fields)) {
    // A bare trailing newline yields one empty field; not a data row.
    if (fields.size() == 1 && fields[0].empty()) continue;
    ++result.stats.rows_read;
    if (fields.size() < needed) {
      ++result.stats.rows_dropped_missing;
      continue;
    }
    RawRow raw;
    raw.year = csv::parse_int(fields[c_year]);
    raw.primary_type = fields[c_type];
    raw.latitude = csv::parse_double(fields[c_lat]);
    raw.longitude = csv::parse_double(fields[c_lon]);

    if (!usable(raw, config)) {
      ++result.stats.rows_dropped_missing;
      continue;
    }
    const auto type = normalize_crime_type(raw.primary_type, config.aliases);
    if (!type) {
      ++result.stats.rows_dropped_unmapped_type;
      continue;
    }
    if (normalize_key(raw.primary_type) != canonical_name(*type)) {
      ++result.stats.alias_merges;
    }
    result.records.push_back({static_cast<int>(*raw.year), *type, *raw.latitude,
                              *raw.longitude});
    ++result.stats.rows_kept;
  }
  return result;
}

void write_incidents(std::ostream& out, std::span<const IncidentRecord> records,
                     const ColumnNames& columns) {
  csv::write_row(out, {columns.year, columns.primary_type, columns.latitude,
                       columns.longitude});
  for (const auto& r : records) {
    csv::write_row(out, {std::to_string(r.year), std::string(canonical_name(r.crime_type)),
                         csv::format_double(r.lat), csv::format_double(r.lon)});
  }
}

std::string stats_to_json(const IngestStats& stats) {
  nlohmann::ordered_json j;
  j["rows_read"] = stats.rows_read;
  j["rows_dropped_missing"] = stats.rows_dropped_missing;
  j["rows_dropped_unmapped_type"] = stats.rows_dropped_unmapped_type;
  j["rows_kept"] = stats.rows_kept;
  j["alias_merges"] = stats.alias_merges;
  return j.dump();
}

}  // namespace hotspot
