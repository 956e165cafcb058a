#include "hotspot/report.hpp"

#include <fstream>
#include <numeric>

#include <json.hpp>

#include "hotspot/csv.hpp"
#include "hotspot/error.hpp"

namespace hotspot {
namespace {

using nlohmann::ordered_json;

std::string cluster_name(int cluster) {
  return cluster == kOutlier ? "Outliers" : "C" + std::to_string(cluster);
}

std::string opt(const std::optional<double>& v) {
  return v ? csv::format_double(*v) : std::string();
}

void check_aligned(const ClusterLabeling& labeling, std::span<const IncidentRecord> records) {
  require(labeling.size() == records.size(), "labeling and records are not aligned");
}

ordered_json band_json(const std::optional<PercentileBand>& band) {
  if (!band) return nullptr;
  return ordered_json{{"low", band->low}, {"high", band->high}};
}

ordered_json group_json(const GroupStat& g) {
  return ordered_json{{"mean", g.mean},
                      {"members", g.members},
                      {"ci68", band_json(g.ci68)},
                      {"ci95", band_json(g.ci95)}};
}

std::vector<std::string> group_row(const GroupStat& g) {
  auto lo = [](const std::optional<PercentileBand>& b) {
    return b ? csv::format_double(b->low) : std::string();
  };
  auto hi = [](const std::optional<PercentileBand>& b) {
    return b ? csv::format_double(b->high) : std::string();
  };
  return {csv::format_double(g.mean), std::to_string(g.members), lo(g.ci68), hi(g.ci68),
          lo(g.ci95), hi(g.ci95)};
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Data, "cannot write " + path.string());
  return out;
}

}  // namespace

std::uint64_t total(const TypeCounts& counts) {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

std::uint64_t YearTypeTable::grand_total() const {
  std::uint64_t sum = 0;
  for (const auto& row : rows) sum += total(row);
  return sum;
}

YearTypeTable yearly_type_counts(std::span<const IncidentRecord> records, YearRange years) {
  require(years.last >= years.first, "empty year range");
  YearTypeTable table;
  table.years = years;
  table.rows.assign(static_cast<std::size_t>(years.count()), TypeCounts{});
  for (const auto& r : records) {
    if (!years.contains(r.year)) continue;
    ++table.rows[static_cast<std::size_t>(r.year - years.first)][index_of(r.crime_type)];
  }
  return table;
}

CountCube incident_cube(const ClusterLabeling& labeling, std::span<const IncidentRecord> records,
                        YearRange years) {
  check_aligned(labeling, records);
  CountCube cube(static_cast<std::size_t>(labeling.n_clusters) + 1,
                 std::vector<TypeCounts>(static_cast<std::size_t>(years.count()), TypeCounts{}));
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    require(years.contains(r.year), "record year " + std::to_string(r.year) + " outside range");
    const int label = labeling.labels[i];
    require(label >= 0 && label <= labeling.n_clusters, "cluster label out of range");
    ++cube[static_cast<std::size_t>(label)][static_cast<std::size_t>(r.year - years.first)]
          [index_of(r.crime_type)];
  }
  return cube;
}

std::vector<ClusterSummary> cluster_summary(const ClusterLabeling& labeling,
                                            std::span<const IncidentRecord> records,
                                            YearRange years, int ddof) {
  const CountCube cube = incident_cube(labeling, records, years);
  const auto grand = static_cast<double>(records.size());
  std::vector<ClusterSummary> out;
  for (std::size_t c = 0; c < cube.size(); ++c) {
    ClusterSummary s;
    s.cluster = static_cast<int>(c);
    std::vector<double> yearly;
    for (const auto& counts : cube[c]) {
      s.per_year.push_back(total(counts));
      s.sum_years += s.per_year.back();
      yearly.push_back(static_cast<double>(s.per_year.back()));
    }
    s.share_of_total = grand > 0 ? static_cast<double>(s.sum_years) / grand : 0.0;
    s.mean_years = static_cast<double>(s.sum_years) / static_cast<double>(years.count());
    s.std_years = stddev(yearly, ddof);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<TypeCounts> type_totals(const ClusterLabeling& labeling,
                                    std::span<const IncidentRecord> records) {
  check_aligned(labeling, records);
  std::vector<TypeCounts> rows(static_cast<std::size_t>(labeling.n_clusters) + 1, TypeCounts{});
  for (std::size_t i = 0; i < records.size(); ++i) {
    const int label = labeling.labels[i];
    require(label >= 0 && label <= labeling.n_clusters, "cluster label out of range");
    ++rows[static_cast<std::size_t>(label)][index_of(records[i].crime_type)];
  }
  return rows;
}

std::vector<CompositionShare> composition_shares(const ClusterLabeling& labeling,
                                                 std::span<const IncidentRecord> records,
                                                 YearRange years) {
  const CountCube cube = incident_cube(labeling, records, years);
  std::vector<CompositionShare> out;
  for (std::size_t c = 0; c < cube.size(); ++c) {
    for (int y = years.first; y <= years.last; ++y) {
      const TypeCounts& counts = cube[c][static_cast<std::size_t>(y - years.first)];
      const std::uint64_t cell = total(counts);
      for (CrimeType t : kAllCrimeTypes) {
        CompositionShare s{static_cast<int>(c), y, t, std::nullopt};
        if (cell > 0) {
          s.share = static_cast<double>(counts[index_of(t)]) / static_cast<double>(cell);
        }
        out.push_back(s);
      }
    }
  }
  return out;
}

GroupStat grouped_mean_ci(std::span<const double> members) {
  GroupStat g;
  g.members = members.size();
  if (members.empty()) return g;
  g.mean = mean(members);
  if (members.size() >= 2) {
    const std::vector<double> values(members.begin(), members.end());
    g.ci68 = central_band(values, 0.68);
    g.ci95 = central_band(values, 0.95);
  }
  return g;
}

std::vector<std::vector<GroupStat>> type_means_across_clusters(const CountCube& cube,
                                                               YearRange years) {
  std::vector<std::vector<GroupStat>> out(kCrimeTypeCount);
  for (CrimeType t : kAllCrimeTypes) {
    for (int y = years.first; y <= years.last; ++y) {
      std::vector<double> members;
      for (std::size_t c = 1; c < cube.size(); ++c) {
        members.push_back(static_cast<double>(
            cube[c][static_cast<std::size_t>(y - years.first)][index_of(t)]));
      }
      out[index_of(t)].push_back(grouped_mean_ci(members));
    }
  }
  return out;
}

std::vector<std::vector<GroupStat>> cluster_means_across_types(const CountCube& cube,
                                                               YearRange years) {
  std::vector<std::vector<GroupStat>> out(cube.size());
  for (std::size_t c = 0; c < cube.size(); ++c) {
    for (int y = years.first; y <= years.last; ++y) {
      const TypeCounts& counts = cube[c][static_cast<std::size_t>(y - years.first)];
      std::vector<double> members(counts.begin(), counts.end());
      out[c].push_back(grouped_mean_ci(members));
    }
  }
  return out;
}

ReportBundle build_report(const ClusterLabeling& labeling, std::span<const IncidentRecord> records,
                          YearRange years, int ddof) {
  ReportBundle report;
  report.years = years;
  report.yearly = yearly_type_counts(records, years);
  report.summary = cluster_summary(labeling, records, years, ddof);
  report.totals = type_totals(labeling, records);
  report.shares = composition_shares(labeling, records, years);
  const CountCube cube = incident_cube(labeling, records, years);
  report.type_means = type_means_across_clusters(cube, years);
  report.cluster_means = cluster_means_across_types(cube, years);
  return report;
}

std::vector<std::string> write_report(const std::filesystem::path& dir, const ReportBundle& report) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> files;
  ordered_json doc;

  std::vector<std::string> type_header;
  for (CrimeType t : kAllCrimeTypes) type_header.emplace_back(short_code(t));

  {
    files.push_back("table1_yearly_type_counts.csv");
    auto out = open_output(dir / files.back());
    std::vector<std::string> header{"Year"};
    header.insert(header.end(), type_header.begin(), type_header.end());
    csv::write_row(out, header);
    ordered_json rows = ordered_json::array();
    for (int y = report.years.first; y <= report.years.last; ++y) {
      const TypeCounts& counts = report.yearly.at(y);
      std::vector<std::string> row{std::to_string(y)};
      ordered_json jrow{{"year", y}};
      for (CrimeType t : kAllCrimeTypes) {
        row.push_back(std::to_string(counts[index_of(t)]));
        jrow[std::string(short_code(t))] = counts[index_of(t)];
      }
      csv::write_row(out, row);
      rows.push_back(std::move(jrow));
    }
    doc["yearly_type_counts"] = std::move(rows);
  }

  {
    files.push_back("table2_cluster_summary.csv");
    auto out = open_output(dir / files.back());
    std::vector<std::string> header{"metric"};
    for (const auto& s : report.summary) header.push_back(cluster_name(s.cluster));
    csv::write_row(out, header);
    std::vector<std::string> share{"share"}, sum{"sum_years"}, mu{"mean_years"}, sd{"std_years"};
    ordered_json rows = ordered_json::array();
    for (const auto& s : report.summary) {
      share.push_back(csv::format_double(s.share_of_total));
      sum.push_back(std::to_string(s.sum_years));
      mu.push_back(csv::format_double(s.mean_years));
      sd.push_back(csv::format_double(s.std_years));
      rows.push_back({{"cluster", s.cluster},
                      {"share_of_total", s.share_of_total},
                      {"sum_years", s.sum_years},
                      {"mean_years", s.mean_years},
                      {"std_years", s.std_years},
                      {"per_year", s.per_year}});
    }
    for (const auto* row : {&share, &sum, &mu, &sd}) csv::write_row(out, *row);
    doc["cluster_summary"] = std::move(rows);
  }

  {
    files.push_back("table3_type_totals.csv");
    auto out = open_output(dir / files.back());
    std::vector<std::string> header{"Subset"};
    header.insert(header.end(), type_header.begin(), type_header.end());
    csv::write_row(out, header);
    ordered_json rows = ordered_json::array();
    for (std::size_t c = 0; c < report.totals.size(); ++c) {
      std::vector<std::string> row{cluster_name(static_cast<int>(c))};
      ordered_json jrow{{"cluster", c}};
      for (CrimeType t : kAllCrimeTypes) {
        row.push_back(std::to_string(report.totals[c][index_of(t)]));
        jrow[std::string(short_code(t))] = report.totals[c][index_of(t)];
      }
      csv::write_row(out, row);
      rows.push_back(std::move(jrow));
    }
    doc["type_totals"] = std::move(rows);
  }

  {
    files.push_back("composition_shares.csv");
    auto out = open_output(dir / files.back());
    csv::write_row(out, {"cluster", "year", "crime_type", "share"});
    ordered_json rows = ordered_json::array();
    for (const auto& s : report.shares) {
      csv::write_row(out, {std::to_string(s.cluster), std::to_string(s.year),
                           std::string(short_code(s.crime_type)), opt(s.share)});
      rows.push_back({{"cluster", s.cluster},
                      {"year", s.year},
                      {"crime_type", short_code(s.crime_type)},
                      {"share", s.share ? ordered_json(*s.share) : ordered_json(nullptr)}});
    }
    doc["composition_shares"] = std::move(rows);
  }

  const std::vector<std::string> group_header{"mean",     "members",  "ci68_low",
                                              "ci68_high", "ci95_low", "ci95_high"};
  {
    files.push_back("type_means_across_clusters.csv");
    auto out = open_output(dir / files.back());
    std::vector<std::string> header{"crime_type", "year"};
    header.insert(header.end(), group_header.begin(), group_header.end());
    csv::write_row(out, header);
    ordered_json rows = ordered_json::array();
    for (CrimeType t : kAllCrimeTypes) {
      for (int y = report.years.first; y <= report.years.last; ++y) {
        const GroupStat& g = report.type_means[index_of(t)][static_cast<std::size_t>(y - report.years.first)];
        std::vector<std::string> row{std::string(short_code(t)), std::to_string(y)};
        const auto values = group_row(g);
        row.insert(row.end(), values.begin(), values.end());
        csv::write_row(out, row);
        ordered_json jrow = group_json(g);
        jrow["crime_type"] = short_code(t);
        jrow["year"] = y;
        rows.push_back(std::move(jrow));
      }
    }
    doc["type_means_across_clusters"] = std::move(rows);
  }

  {
    files.push_back("cluster_means_across_types.csv");
    auto out = open_output(dir / files.back());
    std::vector<std::string> header{"cluster", "year"};
    header.insert(header.end(), group_header.begin(), group_header.end());
    csv::write_row(out, header);
    ordered_json rows = ordered_json::array();
    for (std::size_t c = 0; c < report.cluster_means.size(); ++c) {
      for (int y = report.years.first; y <= report.years.last; ++y) {
        const GroupStat& g = report.cluster_means[c][static_cast<std::size_t>(y - report.years.first)];
        std::vector<std::string> row{std::to_string(c), std::to_string(y)};
        const auto values = group_row(g);
        row.insert(row.end(), values.begin(), values.end());
        csv::write_row(out, row);
        ordered_json jrow = group_json(g);
        jrow["cluster"] = c;
        jrow["year"] = y;
        rows.push_back(std::move(jrow));
      }
    }
    doc["cluster_means_across_types"] = std::move(rows);
  }

  files.push_back("report.json");
  auto out = open_output(dir / files.back());
  out << doc.dump(2) << '\n';
  return files;
}

}  // namespace hotspot
