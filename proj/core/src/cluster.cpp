#include "hotspot/cluster.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>

#include "hotspot/csv.hpp"
#include "hotspot/error.hpp"
#include "hotspot/parallel.hpp"
#include "hotspot/random.hpp"

namespace hotspot {
namespace {

// Fixed-width row of bits for the oracle's relation matrices.
class BitRow {
 public:
  explicit BitRow(std::size_t n = 0) : words_((n + 63) / 64, 0) {}
  void set(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
  bool test(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1u; }
  BitRow& operator|=(const BitRow& o) {
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] |= o.words_[w];
    return *this;
  }
  bool intersects(const BitRow& o) const {
    for (std::size_t w = 0; w < words_.size(); ++w) {
      if (words_[w] & o.words_[w]) return true;
    }
    return false;
  }
  std::size_t count() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }
  friend bool operator==(const BitRow&, const BitRow&) = default;

 private:
  std::vector<std::uint64_t> words_;
};

NeighborGraph build_graph(std::size_t n, auto&& collect) {
  std::vector<std::vector<std::uint32_t>> rows(n);
  parallel_for(n, [&](std::size_t i) {
    collect(i, rows[i]);
    std::sort(rows[i].begin(), rows[i].end());
  });
  std::vector<std::size_t> offsets(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) offsets[i + 1] = offsets[i] + rows[i].size();
  std::vector<std::uint32_t> ids;
  ids.reserve(offsets[n]);
  for (auto& row : rows) {
    ids.insert(ids.end(), row.begin(), row.end());
    std::vector<std::uint32_t>().swap(row);
  }
  return NeighborGraph(std::move(offsets), std::move(ids));
}

void check_graph_size(std::size_t n) {
  require(n <= std::numeric_limits<std::uint32_t>::max(), "too many points for a neighbor graph");
}

}  // namespace

std::size_t ClusterLabeling::outlier_count() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), kOutlier));
}

double ClusterLabeling::outlier_share() const {
  if (labels.empty()) return 0.0;
  return static_cast<double>(outlier_count()) / static_cast<double>(labels.size());
}

NeighborGraph::NeighborGraph(std::vector<std::size_t> offsets, std::vector<std::uint32_t> ids)
    : offsets_(std::move(offsets)), ids_(std::move(ids)) {
  require(!offsets_.empty() && offsets_.back() == ids_.size(), "malformed neighbor graph");
}

NeighborGraph NeighborGraph::from_matrix(const DistanceMatrix& dm, double epsilon) {
  require(epsilon > 0.0, "epsilon must be positive");
  check_graph_size(dm.size());
  const std::size_t n = dm.size();
  return build_graph(n, [&](std::size_t i, std::vector<std::uint32_t>& row) {
    for (std::size_t j = 0; j < n; ++j) {
      if (dm(i, j) <= epsilon) row.push_back(static_cast<std::uint32_t>(j));
    }
  });
}

NeighborGraph NeighborGraph::from_points(const PlanarPointSet& ps, double epsilon) {
  require(epsilon > 0.0, "epsilon must be positive");
  check_graph_size(ps.size());
  const SpatialIndex index(ps, epsilon);
  return build_graph(ps.size(), [&](std::size_t i, std::vector<std::uint32_t>& row) {
    index.for_each_within(ps[i], epsilon, [&](std::size_t j, double) {
      row.push_back(static_cast<std::uint32_t>(j));
    });
  });
}

NeighborGraph NeighborGraph::from_rescaled_points(const PlanarPointSet& ps,
                                                  std::span<const double> factors,
                                                  double epsilon) {
  require(epsilon > 0.0, "epsilon must be positive");
  require(factors.size() == ps.size(), "one density factor per point required");
  check_graph_size(ps.size());
  const std::size_t n = ps.size();
  if (n == 0) return NeighborGraph({0}, {});

  const double phi_min = *std::min_element(factors.begin(), factors.end());
  const double reach = epsilon / phi_min * (1.0 + 1e-12);
  auto accept = [&](std::size_t i, std::size_t j, double d) {
    return rescaled_distance(d, factors[i], factors[j]) <= epsilon;
  };

  if (!(phi_min > 0.0) || !std::isfinite(reach)) {
    // Factors underflowed; no planar bound exists, fall back to all pairs.
    return build_graph(n, [&](std::size_t i, std::vector<std::uint32_t>& row) {
      for (std::size_t j = 0; j < n; ++j) {
        if (accept(i, j, distance(ps[i], ps[j]))) row.push_back(static_cast<std::uint32_t>(j));
      }
    });
  }
  const SpatialIndex index(ps, reach);
  return build_graph(n, [&](std::size_t i, std::vector<std::uint32_t>& row) {
    index.for_each_within(ps[i], reach, [&](std::size_t j, double) {
      // Recompute with the source point first so the value matches
      // distance(ps[i], ps[j]) used by the dense path bit for bit.
      if (accept(i, j, distance(ps[i], ps[j]))) row.push_back(static_cast<std::uint32_t>(j));
    });
  });
}

ClusterLabeling dbscan(const NeighborGraph& graph, std::size_t kappa) {
  require(kappa >= 1, "kappa must be at least 1");
  const std::size_t n = graph.size();
  ClusterLabeling out;
  out.labels.assign(n, kOutlier);
  out.provenance.assign(n, Provenance::Sampled);

  std::vector<char> core(n, 0);
  for (std::size_t i = 0; i < n; ++i) core[i] = graph.degree(i) >= kappa;

  std::deque<std::size_t> frontier;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (!core[seed] || out.labels[seed] != kOutlier) continue;
    const int id = ++out.n_clusters;
    out.labels[seed] = id;
    frontier.push_back(seed);
    while (!frontier.empty()) {
      const std::size_t u = frontier.front();
      frontier.pop_front();
      for (std::uint32_t v : graph.neighbors(u)) {
        if (core[v] && out.labels[v] == kOutlier) {
          out.labels[v] = id;
          frontier.push_back(v);
        }
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) continue;
    for (std::uint32_t j : graph.neighbors(i)) {
      if (core[j]) {
        out.labels[i] = out.labels[j];
        break;
      }
    }
  }
  return out;
}

ClusterLabeling dbscan(const DistanceMatrix& dm, const DbscanParams& params) {
  return dbscan(NeighborGraph::from_matrix(dm, params.epsilon), params.kappa);
}

ClusterLabeling dbscan_oracle(const DistanceMatrix& dm, const DbscanParams& params) {
  const std::size_t n = dm.size();
  if (n > kOracleMaxPoints) {
    fail(ErrorKind::Precondition, "dbscan_oracle is limited to " +
                                      std::to_string(kOracleMaxPoints) + " points");
  }
  require(params.epsilon > 0.0, "epsilon must be positive");
  require(params.kappa >= 1, "kappa must be at least 1");

  // Epsilon-neighborhoods, closed balls.
  std::vector<BitRow> nbhd(n, BitRow(n));
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      if (dm(x, y) <= params.epsilon) nbhd[x].set(y);
    }
  }
  std::vector<char> core(n);
  for (std::size_t x = 0; x < n; ++x) core[x] = nbhd[x].count() >= params.kappa;

  // reach[x] holds every y density-reachable from x: the transitive closure
  // of direct density-reachability (y in N(x) with x a core point).
  std::vector<BitRow> reach(n, BitRow(n));
  for (std::size_t x = 0; x < n; ++x) {
    if (core[x]) reach[x] = nbhd[x];
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (reach[i].test(k)) reach[i] |= reach[k];
    }
  }

  // reached_by[y] = {z : y reachable from z}; x, y are density-connected
  // when these sets intersect.
  std::vector<BitRow> reached_by(n, BitRow(n));
  for (std::size_t z = 0; z < n; ++z) {
    for (std::size_t y = 0; y < n; ++y) {
      if (reach[z].test(y)) reached_by[y].set(z);
    }
  }

  // Each core point's reachability set is a cluster; cores reachable from
  // one another produce the same set.
  std::vector<BitRow> clusters;
  std::vector<int> core_cluster(n, kOutlier);
  for (std::size_t x = 0; x < n; ++x) {
    if (!core[x] || core_cluster[x] != kOutlier) continue;
    clusters.push_back(reach[x]);
    const int id = static_cast<int>(clusters.size());
    for (std::size_t y = 0; y < n; ++y) {
      if (core[y] && reach[x].test(y)) core_cluster[y] = id;
    }
  }

  for (const BitRow& c : clusters) {
    std::vector<std::size_t> members;
    for (std::size_t y = 0; y < n; ++y) {
      if (c.test(y)) members.push_back(y);
    }
    for (std::size_t a = 0; a < members.size(); ++a) {
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        if (!reached_by[members[a]].intersects(reached_by[members[b]])) {
          throw std::logic_error("dbscan_oracle: cluster members not density-connected");
        }
      }
    }
  }

  ClusterLabeling out;
  out.labels.assign(n, kOutlier);
  out.provenance.assign(n, Provenance::Sampled);
  out.n_clusters = static_cast<int>(clusters.size());
  for (std::size_t y = 0; y < n; ++y) {
    if (core[y]) {
      out.labels[y] = core_cluster[y];
      continue;
    }
    // Border point: the lowest-indexed core that reaches it directly decides.
    for (std::size_t z = 0; z < n; ++z) {
      if (core[z] && nbhd[z].test(y)) {
        out.labels[y] = core_cluster[z];
        break;
      }
    }
  }
  return out;
}

ClusterLabeling dbscan_oracle(const PlanarPointSet& ps, const DbscanParams& params) {
  if (ps.size() > kOracleMaxPoints) {
    fail(ErrorKind::Precondition, "dbscan_oracle is limited to " +
                                      std::to_string(kOracleMaxPoints) + " points");
  }
  return dbscan_oracle(pairwise_distances(ps), params);
}

PointSample sample_points(const PlanarPointSet& ps, std::size_t n_sample, std::uint64_t seed) {
  require(n_sample > 0, "sample size must be positive");
  if (n_sample > ps.size()) {
    fail(ErrorKind::Precondition, "sample size " + std::to_string(n_sample) +
                                      " exceeds point count " + std::to_string(ps.size()));
  }
  Engine engine(seed);
  PointSample sample;
  sample.source_index = sample_indices(ps.size(), n_sample, engine);
  sample.points = ps.subset(sample.source_index);
  return sample;
}

ClusterLabeling assign_by_envelope(const PlanarPointSet& full,
                                   const ClusterLabeling& sample_labels,
                                   std::span<const std::size_t> sample_map, double radius) {
  require(radius > 0.0, "envelope radius must be positive");
  require(sample_labels.size() == sample_map.size(), "sample labels and index map differ in size");

  ClusterLabeling out;
  out.n_clusters = sample_labels.n_clusters;
  out.labels.assign(full.size(), kOutlier);
  out.provenance.assign(full.size(), Provenance::EnvelopeAssigned);

  std::vector<PlanarPoint> anchors;
  std::vector<int> anchor_label;
  for (std::size_t s = 0; s < sample_map.size(); ++s) {
    const std::size_t src = sample_map[s];
    require(src < full.size(), "sample index out of range");
    out.labels[src] = sample_labels.labels[s];
    out.provenance[src] = Provenance::Sampled;
    if (sample_labels.labels[s] != kOutlier) {
      anchors.push_back(full[src]);
      anchor_label.push_back(sample_labels.labels[s]);
    }
  }
  if (anchors.empty()) return out;

  const SpatialIndex index(anchors, radius);
  parallel_for(full.size(), [&](std::size_t i) {
    if (out.provenance[i] == Provenance::Sampled) return;
    double best_d = 0.0;
    int best = kOutlier;
    index.for_each_within(full[i], radius, [&](std::size_t a, double d) {
      const int label = anchor_label[a];
      if (best == kOutlier || d < best_d || (d == best_d && label < best)) {
        best_d = d;
        best = label;
      }
    });
    out.labels[i] = best;
  });
  return out;
}

LabelingComparison compare_labelings(const ClusterLabeling& a, const ClusterLabeling& b) {
  require(a.size() == b.size(), "labelings cover different point counts");
  LabelingComparison cmp;
  std::vector<std::map<int, std::size_t>> overlap(static_cast<std::size_t>(a.n_clusters) + 1);
  std::vector<std::size_t> sizes(overlap.size(), 0);
  std::size_t agree = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const int la = a.labels[i];
    const int lb = b.labels[i];
    if ((la == kOutlier) == (lb == kOutlier)) ++agree;
    if (la == kOutlier) continue;
    ++sizes[la];
    if (lb != kOutlier) ++overlap[la][lb];
  }
  cmp.agreement = a.size() == 0 ? 1.0 : static_cast<double>(agree) / static_cast<double>(a.size());
  for (int c = 1; c <= a.n_clusters; ++c) {
    ClusterOverlap o;
    o.cluster = c;
    o.size = sizes[c];
    std::size_t best = 0;
    for (const auto& [lb, count] : overlap[c]) {
      if (count > best) {  // map order: lower id wins ties
        best = count;
        o.matched = lb;
      }
    }
    o.fraction = o.size == 0 ? 0.0 : static_cast<double>(best) / static_cast<double>(o.size);
    cmp.clusters.push_back(o);
  }
  return cmp;
}

bool same_partition(const ClusterLabeling& a, const ClusterLabeling& b) {
  if (a.size() != b.size()) return false;
  std::map<int, int> forward, backward;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const int la = a.labels[i];
    const int lb = b.labels[i];
    if ((la == kOutlier) != (lb == kOutlier)) return false;
    if (la == kOutlier) continue;
    auto [f, f_new] = forward.emplace(la, lb);
    if (!f_new && f->second != lb) return false;
    auto [r, r_new] = backward.emplace(lb, la);
    if (!r_new && r->second != la) return false;
  }
  return true;
}

void write_labeling_csv(std::ostream& out, const ClusterLabeling& labeling) {
  out << "point_id,cluster_id,provenance\n";
  for (std::size_t i = 0; i < labeling.size(); ++i) {
    const bool sampled =
        i >= labeling.provenance.size() || labeling.provenance[i] == Provenance::Sampled;
    out << i << ',' << labeling.labels[i] << ',' << (sampled ? "sampled" : "envelope") << '\n';
  }
}

ClusterLabeling read_labeling_csv(std::istream& in) {
  csv::Reader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields) || fields.size() < 2) {
    fail(ErrorKind::Data, "labeling CSV has no header");
  }
  ClusterLabeling out;
  while (reader.next(fields)) {
    if (fields.size() == 1 && fields[0].empty()) continue;
    const auto id = fields.size() >= 2 ? csv::parse_int(fields[0]) : std::nullopt;
    const auto label = fields.size() >= 2 ? csv::parse_int(fields[1]) : std::nullopt;
    if (!id || !label || *id != static_cast<long long>(out.labels.size()) || *label < 0) {
      fail(ErrorKind::Data, "malformed labeling CSV at line " + std::to_string(reader.line()));
    }
    out.labels.push_back(static_cast<int>(*label));
    const bool envelope = fields.size() >= 3 && csv::trim(fields[2]) == "envelope";
    out.provenance.push_back(envelope ? Provenance::EnvelopeAssigned : Provenance::Sampled);
    out.n_clusters = std::max(out.n_clusters, static_cast<int>(*label));
  }
  return out;
}

}  // namespace hotspot
