#ifndef VARIETIES_CLUSTERING_H_
#define VARIETIES_CLUSTERING_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace varieties {

struct SplitRecord {
  std::size_t cluster;  // id of the cluster that was split
  double sse_before;    // its SSE
  double sse_after;     // SSE of the two halves
};

struct Clustering {
  std::vector<std::size_t> assignment;  // per input vector
  std::vector<std::vector<double>> centroids;
  std::vector<double> cluster_sse;
  double sse = 0.0;
  std::vector<SplitRecord> splits;

  std::size_t k() const { return centroids.size(); }
};

// Sum of squared Euclidean distances to the assigned centroids.
double clustering_sse(std::span<const std::vector<double>> vectors,
                      const Clustering& clustering);

// Starts from a single cluster and splits the cluster with the largest SSE
// by 2-means until there are k clusters. Each split keeps the best of
// `trials` random-pair initializations (lowest SSE, then lowest trial).
// Throws ValidationError if k is 0 or exceeds the number of vectors.
Clustering bisecting_kmeans(std::span<const std::vector<double>> vectors,
                            std::size_t k, std::uint64_t seed,
                            std::size_t trials = 10);

struct Projection2D {
  std::vector<std::array<double, 2>> coords;
  std::array<std::vector<double>, 2> axes;  // orthonormal
  std::array<double, 2> eigenvalues{};
  // Fractions of the total variance.
  std::array<double, 2> explained{};
  std::vector<double> mean;
};

// Top two principal axes of the mean-centered covariance by power
// iteration with deflation. Each axis is signed so that its largest-magnitude
// component is positive. Throws ValidationError for fewer than 3 vectors,
// dimension < 2, or zero total variance.
Projection2D pca_2d(std::span<const std::vector<double>> vectors);

struct ClusterMatch {
  double accuracy = 0.0;
  // Best cluster id -> label map; clusters left unmatched map to -1.
  std::vector<int> label_of_cluster;
};

// Maximum over injective cluster/label matchings of the fraction of
// correctly labeled items. Both the cluster and label counts must be at
// most 6.
ClusterMatch match_clusters(std::span<const std::size_t> assignment,
                            std::span<const int> labels);
double cluster_accuracy(std::span<const std::size_t> assignment,
                        std::span<const int> labels);

// chunk_id,x,y,cluster,true_label,correct
void write_scatter_csv(std::ostream& out, const Projection2D& projection,
                       const Clustering& clustering,
                       std::span<const int> labels,
                       std::span<const std::string> label_names,
                       std::span<const std::string> chunk_ids);

}  // namespace varieties

#endif  // VARIETIES_CLUSTERING_H_
