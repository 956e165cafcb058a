#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "hotspot/density.hpp"
#include "hotspot/geometry.hpp"

namespace hotspot {

inline constexpr int kOutlier = 0;

struct DbscanParams {
  double epsilon = 0.0;    // contiguity radius, in the distance's units
  std::size_t kappa = 1;   // minimum neighborhood size, point itself included
};

enum class Provenance : std::uint8_t { Sampled, EnvelopeAssigned };

/// labels[i] is kOutlier or a cluster id in 1..n_clusters.
struct ClusterLabeling {
  std::vector<int> labels;
  int n_clusters = 0;
  std::vector<Provenance> provenance;

  std::size_t size() const { return labels.size(); }
  std::size_t outlier_count() const;
  double outlier_share() const;
};

/// Closed epsilon-neighborhoods in compressed row form. Every row contains
/// the point itself and is sorted ascending.
class NeighborGraph {
 public:
  NeighborGraph() = default;
  NeighborGraph(std::vector<std::size_t> offsets, std::vector<std::uint32_t> ids);

  std::size_t size() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t degree(std::size_t i) const { return offsets_[i + 1] - offsets_[i]; }
  std::span<const std::uint32_t> neighbors(std::size_t i) const {
    return {ids_.data() + offsets_[i], degree(i)};
  }
  std::size_t edge_count() const { return ids_.size(); }

  /// {j : dm(i, j) <= epsilon}. O(n^2) lookups, no metric assumptions.
  static NeighborGraph from_matrix(const DistanceMatrix& dm, double epsilon);

  /// Plain planar neighborhoods through a grid index.
  static NeighborGraph from_points(const PlanarPointSet& ps, double epsilon);

  /// {j : rescaled_distance(d_ij, phi_i, phi_j) <= epsilon} without
  /// materializing the matrix. Candidates are gathered within
  /// epsilon / min(phi) planar meters, which bounds every qualifying pair
  /// because the pair factor never falls below min(phi); each candidate is
  /// then tested on its exact rescaled value.
  static NeighborGraph from_rescaled_points(const PlanarPointSet& ps,
                                            std::span<const double> factors,
                                            double epsilon);

 private:
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> ids_;
};

/// Core points have degree >= kappa. Clusters are the connected components
/// of core points, numbered by their lowest core index. A border point joins
/// the cluster of its lowest-indexed core neighbor; everything else is an
/// outlier. Region expansion is sequential.
ClusterLabeling dbscan(const NeighborGraph& graph, std::size_t kappa);
ClusterLabeling dbscan(const DistanceMatrix& dm, const DbscanParams& params);

inline constexpr std::size_t kOracleMaxPoints = 2'000;

/// Reference DBSCAN built from the reachability relations themselves:
/// direct density-reachability, its transitive closure, density-connectivity
/// through a shared origin, then clusters as reachability sets of core
/// points. Verifies connectivity inside every cluster. Throws
/// Error(Precondition) above kOracleMaxPoints.
ClusterLabeling dbscan_oracle(const DistanceMatrix& dm, const DbscanParams& params);
ClusterLabeling dbscan_oracle(const PlanarPointSet& ps, const DbscanParams& params);

struct PointSample {
  PlanarPointSet points;
  std::vector<std::size_t> source_index;  // ascending indices into the source set
};

/// Uniform sample without replacement, deterministic per seed.
PointSample sample_points(const PlanarPointSet& ps, std::size_t n_sample, std::uint64_t seed);

inline constexpr double kDefaultEnvelopeRadius = 10.0;

/// Propagates sample labels to the full set. Sampled points keep their label;
/// every other point takes the label of the nearest labeled (non-outlier)
/// sample within `radius` planar meters (closed ball, distance ties go to
/// the lower cluster id), else becomes an outlier.
ClusterLabeling assign_by_envelope(const PlanarPointSet& full,
                                   const ClusterLabeling& sample_labels,
                                   std::span<const std::size_t> sample_map,
                                   double radius = kDefaultEnvelopeRadius);

struct ClusterOverlap {
  int cluster = 0;        // id in the first labeling
  int matched = 0;        // majority non-outlier id in the second (0 if none)
  std::size_t size = 0;
  double fraction = 0.0;  // share of the cluster carrying `matched`
};

struct LabelingComparison {
  std::vector<ClusterOverlap> clusters;
  double agreement = 0.0;  // share of points with equal outlier status
};

LabelingComparison compare_labelings(const ClusterLabeling& a, const ClusterLabeling& b);

/// True when both labelings induce the same partition and the same outlier
/// set, ignoring cluster numbering.
bool same_partition(const ClusterLabeling& a, const ClusterLabeling& b);

/// CSV columns point_id,cluster_id,provenance (cluster 0 = outlier,
/// provenance "sampled" or "envelope").
void write_labeling_csv(std::ostream& out, const ClusterLabeling& labeling);
ClusterLabeling read_labeling_csv(std::istream& in);

}  // namespace hotspot
