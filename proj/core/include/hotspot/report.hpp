#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hotspot/cluster.hpp"
#include "hotspot/ingest.hpp"
#include "hotspot/stats.hpp"

namespace hotspot {

using TypeCounts = std::array<std::uint64_t, kCrimeTypeCount>;

std::uint64_t total(const TypeCounts& counts);

/// Year x crime type counts; rows[y - years.first].
struct YearTypeTable {
  YearRange years;
  std::vector<TypeCounts> rows;

  const TypeCounts& at(int year) const { return rows.at(static_cast<std::size_t>(year - years.first)); }
  std::uint64_t grand_total() const;
};

/// Records outside `years` are ignored.
YearTypeTable yearly_type_counts(std::span<const IncidentRecord> records, YearRange years);

struct ClusterSummary {
  int cluster = 0;  // 0 = outliers
  double share_of_total = 0.0;
  std::uint64_t sum_years = 0;
  double mean_years = 0.0;
  double std_years = 0.0;
  std::vector<std::uint64_t> per_year;
};

/// One row per cluster id 0..n_clusters. Yearly totals feed the mean and the
/// standard deviation (`ddof` = 1 for the sample deviation). Throws
/// Error(Precondition) when labeling and records are not aligned or a
/// record falls outside `years`.
std::vector<ClusterSummary> cluster_summary(const ClusterLabeling& labeling,
                                            std::span<const IncidentRecord> records,
                                            YearRange years, int ddof = 1);

/// Cluster x type counts; rows[0] holds the outliers.
std::vector<TypeCounts> type_totals(const ClusterLabeling& labeling,
                                    std::span<const IncidentRecord> records);

struct CompositionShare {
  int cluster = 0;
  int year = 0;
  CrimeType crime_type = CrimeType::Theft;
  std::optional<double> share;  // nullopt for a cluster-year without incidents
};

std::vector<CompositionShare> composition_shares(const ClusterLabeling& labeling,
                                                 std::span<const IncidentRecord> records,
                                                 YearRange years);

struct GroupStat {
  double mean = 0.0;
  std::size_t members = 0;
  std::optional<PercentileBand> ci68;  // nullopt for single-member groups
  std::optional<PercentileBand> ci95;
};

/// Mean with nearest-rank percentile bands across the members of a group.
GroupStat grouped_mean_ci(std::span<const double> members);

/// counts[cluster][year - first][type].
using CountCube = std::vector<std::vector<TypeCounts>>;

CountCube incident_cube(const ClusterLabeling& labeling, std::span<const IncidentRecord> records,
                        YearRange years);

/// Per type and year: mean incident count across clusters 1..n (outliers
/// excluded), banded across clusters. Result[type][year - first].
std::vector<std::vector<GroupStat>> type_means_across_clusters(const CountCube& cube,
                                                               YearRange years);

/// Per cluster (0..n) and year: mean count across the eight types, banded
/// across types. Result[cluster][year - first].
std::vector<std::vector<GroupStat>> cluster_means_across_types(const CountCube& cube,
                                                               YearRange years);

struct ReportBundle {
  YearRange years;
  YearTypeTable yearly;
  std::vector<ClusterSummary> summary;
  std::vector<TypeCounts> totals;
  std::vector<CompositionShare> shares;
  std::vector<std::vector<GroupStat>> type_means;
  std::vector<std::vector<GroupStat>> cluster_means;
};

ReportBundle build_report(const ClusterLabeling& labeling, std::span<const IncidentRecord> records,
                          YearRange years, int ddof = 1);

/// Writes one CSV per table plus report.json into `dir`; returns the file
/// names written, relative to `dir`.
std::vector<std::string> write_report(const std::filesystem::path& dir, const ReportBundle& report);

}  // namespace hotspot
