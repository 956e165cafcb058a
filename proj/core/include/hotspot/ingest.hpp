#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hotspot {

/// The eight Part I offense classes. Closed set.
enum class CrimeType : std::uint8_t {
  Robbery,
  Theft,
  Burglary,
  MotorVehicleTheft,
  Assault,
  CriminalSexualAssault,
  Arson,
  Homicide,
};

inline constexpr std::size_t kCrimeTypeCount = 8;

inline constexpr std::array<CrimeType, kCrimeTypeCount> kAllCrimeTypes = {
    CrimeType::Robbery,  CrimeType::Theft,
    CrimeType::Burglary, CrimeType::MotorVehicleTheft,
    CrimeType::Assault,  CrimeType::CriminalSexualAssault,
    CrimeType::Arson,    CrimeType::Homicide,
};

constexpr std::size_t index_of(CrimeType t) { return static_cast<std::size_t>(t); }

/// Upper-case portal spelling, e.g. "MOTOR VEHICLE THEFT".
std::string_view canonical_name(CrimeType t);
/// Two-letter table header code (RO, TH, BU, MO, AS, CR, AR, HO).
std::string_view short_code(CrimeType t);
std::optional<CrimeType> crime_type_from_name(std::string_view name);

/// Inclusive calendar-year window.
struct YearRange {
  int first = 2001;
  int last = 2022;

  int count() const { return last - first + 1; }
  bool contains(int year) const { return year >= first && year <= last; }
};

struct RawRow {
  std::optional<long long> year;
  std::string primary_type;
  std::optional<double> latitude;
  std::optional<double> longitude;
};

struct IncidentRecord {
  int year = 0;
  CrimeType crime_type = CrimeType::Theft;
  double lat = 0.0;
  double lon = 0.0;

  friend bool operator==(const IncidentRecord&, const IncidentRecord&) = default;
};

struct IngestStats {
  std::uint64_t rows_read = 0;
  std::uint64_t rows_dropped_missing = 0;
  std::uint64_t rows_dropped_unmapped_type = 0;
  std::uint64_t rows_kept = 0;
  std::uint64_t alias_merges = 0;

  friend bool operator==(const IngestStats&, const IngestStats&) = default;
};

/// Maps normalized (trimmed, upper-cased) source strings to crime types.
class AliasTable {
 public:
  /// Portal defaults: the eight canonical names plus the legacy
  /// "CRIM SEXUAL ASSAULT" spelling.
  static AliasTable portal_defaults();

  void add(std::string_view raw, CrimeType type);

  /// Returns the mapped type, or nullopt for an unmapped string.
  std::optional<CrimeType> lookup(std::string_view raw) const;

  const std::map<std::string, CrimeType, std::less<>>& entries() const { return entries_; }

 private:
  std::map<std::string, CrimeType, std::less<>> entries_;
};

/// Trim surrounding whitespace and upper-case ASCII letters.
std::string normalize_key(std::string_view raw);

/// nullopt is the Unmapped marker.
std::optional<CrimeType> normalize_crime_type(std::string_view raw,
                                              const AliasTable& table);

struct ColumnNames {
  std::string year = "Year";
  std::string primary_type = "Primary Type";
  std::string latitude = "Latitude";
  std::string longitude = "Longitude";
};

struct IngestConfig {
  ColumnNames columns;
  AliasTable aliases = AliasTable::portal_defaults();
  YearRange years;
};

struct IngestResult {
  std::vector<IncidentRecord> records;
  IngestStats stats;
};

/// Streams a header-bearing CSV export into typed records.
///
/// A row is counted as missing (and dropped) when any required field is
/// absent or unparseable, the year lies outside the configured range, the
/// coordinates are out of range, or both coordinates are exactly zero.
/// Rows that pass those checks but carry a non-Part-I type are counted as
/// unmapped. Throws Error(Config) when a required column is absent from
/// the header; malformed rows are never fatal.
IngestResult parse_incidents(std::istream& source, const IngestConfig& config = {});

/// Writes records using the configured column names, so the output parses
/// back to identical records.
void write_incidents(std::ostream& out, std::span<const IncidentRecord> records,
                     const ColumnNames& columns = {});

/// Flat key-value JSON object.
std::string stats_to_json(const IngestStats& stats);

}  // namespace hotspot
