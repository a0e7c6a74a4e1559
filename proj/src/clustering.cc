#include "varieties/clustering.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>

#include "varieties/error.h"
#include "varieties/features.h"
#include "varieties/rng.h"

namespace varieties {
namespace {

constexpr std::size_t kMaxLloydIterations = 300;
constexpr std::size_t kMaxPowerIterations = 10000;
constexpr double kPowerTolerance = 1e-10;
constexpr std::size_t kMaxMatchedClasses = 6;

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    d += t * t;
  }
  return d;
}

std::vector<double> mean_of(std::span<const std::vector<double>> vectors,
                            std::span<const std::size_t> members) {
  std::vector<double> m(vectors.front().size(), 0.0);
  for (std::size_t i : members) {
    for (std::size_t f = 0; f < m.size(); ++f) m[f] += vectors[i][f];
  }
  for (double& v : m) v /= static_cast<double>(members.size());
  return m;
}

double sse_of(std::span<const std::vector<double>> vectors,
              std::span<const std::size_t> members,
              std::span<const double> centroid) {
  double s = 0;
  for (std::size_t i : members) s += squared_distance(vectors[i], centroid);
  return s;
}

struct Split {
  std::vector<std::size_t> left, right;
  std::vector<double> left_centroid, right_centroid;
  double left_sse = 0, right_sse = 0;

  double sse() const { return left_sse + right_sse; }
};

// Lloyd's algorithm with two centroids seeded at members a and b. Returns
// false if a side ends up empty.
bool two_means(std::span<const std::vector<double>> vectors,
               std::span<const std::size_t> members, std::size_t a,
               std::size_t b, Split& out) {
  std::vector<double> c0 = vectors[members[a]], c1 = vectors[members[b]];
  std::vector<char> side(members.size(), 2);
  for (std::size_t iter = 0; iter < kMaxLloydIterations; ++iter) {
    bool changed = false;
    for (std::size_t t = 0; t < members.size(); ++t) {
      const auto& x = vectors[members[t]];
      const char s = squared_distance(x, c1) < squared_distance(x, c0) ? 1 : 0;
      if (s != side[t]) {
        side[t] = s;
        changed = true;
      }
    }
    out.left.clear();
    out.right.clear();
    for (std::size_t t = 0; t < members.size(); ++t) {
      (side[t] ? out.right : out.left).push_back(members[t]);
    }
    if (out.left.empty() || out.right.empty()) return false;
    c0 = mean_of(vectors, out.left);
    c1 = mean_of(vectors, out.right);
    if (!changed) break;
  }
  out.left_centroid = std::move(c0);
  out.right_centroid = std::move(c1);
  out.left_sse = sse_of(vectors, out.left, out.left_centroid);
  out.right_sse = sse_of(vectors, out.right, out.right_centroid);
  return true;
}

// Used when every initialization collapses (e.g. duplicate points): the
// member farthest from the centroid becomes its own cluster.
Split peel_farthest(std::span<const std::vector<double>> vectors,
                    std::span<const std::size_t> members,
                    std::span<const double> centroid) {
  std::size_t far = 0;
  double best = -1;
  for (std::size_t t = 0; t < members.size(); ++t) {
    const double d = squared_distance(vectors[members[t]], centroid);
    if (d > best) {
      best = d;
      far = t;
    }
  }
  Split s;
  for (std::size_t t = 0; t < members.size(); ++t) {
    (t == far ? s.right : s.left).push_back(members[t]);
  }
  s.left_centroid = mean_of(vectors, s.left);
  s.right_centroid = mean_of(vectors, s.right);
  s.left_sse = sse_of(vectors, s.left, s.left_centroid);
  s.right_sse = 0;
  return s;
}

}  // namespace

double clustering_sse(std::span<const std::vector<double>> vectors,
                      const Clustering& clustering) {
  double s = 0;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    s += squared_distance(vectors[i],
                          clustering.centroids[clustering.assignment[i]]);
  }
  return s;
}

Clustering bisecting_kmeans(std::span<const std::vector<double>> vectors,
                            std::size_t k, std::uint64_t seed,
                            std::size_t trials) {
  if (k == 0) throw ValidationError("k must be at least 1");
  if (k > vectors.size()) {
    throw ValidationError("k = " + std::to_string(k) + " exceeds the " +
                          std::to_string(vectors.size()) + " input vectors");
  }
  if (trials == 0) throw ValidationError("trials must be at least 1");
  const std::size_t dim = vectors.front().size();
  for (const auto& v : vectors) {
    if (v.size() != dim) throw ValidationError("ragged input vectors");
  }

  std::vector<std::vector<std::size_t>> members(1);
  members[0].resize(vectors.size());
  std::iota(members[0].begin(), members[0].end(), 0);
  Clustering result;
  result.centroids.push_back(mean_of(vectors, members[0]));
  result.cluster_sse.push_back(
      sse_of(vectors, members[0], result.centroids[0]));

  for (std::size_t split = 1; split < k; ++split) {
    // Largest-SSE cluster that can be split; ties go to the lower id.
    std::size_t target = members.size();
    for (std::size_t c = 0; c < members.size(); ++c) {
      if (members[c].size() < 2) continue;
      if (target == members.size() ||
          result.cluster_sse[c] > result.cluster_sse[target]) {
        target = c;
      }
    }
    const auto& pool = members[target];
    Split best;
    double best_sse = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < trials; ++t) {
      Rng rng(derive_seed(derive_seed(seed, split), t));
      const std::size_t a = rng.below(pool.size());
      std::size_t b = rng.below(pool.size() - 1);
      if (b >= a) ++b;
      Split candidate;
      if (two_means(vectors, pool, a, b, candidate) &&
          candidate.sse() < best_sse) {
        best_sse = candidate.sse();
        best = std::move(candidate);
      }
    }
    if (!std::isfinite(best_sse)) {
      best = peel_farthest(vectors, pool, result.centroids[target]);
    }
    result.splits.push_back(
        {target, result.cluster_sse[target], best.sse()});
    members[target] = std::move(best.left);
    result.centroids[target] = std::move(best.left_centroid);
    result.cluster_sse[target] = best.left_sse;
    members.push_back(std::move(best.right));
    result.centroids.push_back(std::move(best.right_centroid));
    result.cluster_sse.push_back(best.right_sse);
  }

  result.assignment.assign(vectors.size(), 0);
  for (std::size_t c = 0; c < members.size(); ++c) {
    for (std::size_t i : members[c]) result.assignment[i] = c;
  }
  result.sse = std::accumulate(result.cluster_sse.begin(),
                               result.cluster_sse.end(), 0.0);
  return result;
}

Projection2D pca_2d(std::span<const std::vector<double>> vectors) {
  if (vectors.size() < 3) {
    throw ValidationError("PCA needs at least 3 vectors");
  }
  const std::size_t dim = vectors.front().size();
  if (dim < 2) throw ValidationError("PCA needs dimension at least 2");
  const auto n = static_cast<Eigen::Index>(vectors.size());
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (vectors[i].size() != dim) throw ValidationError("ragged input vectors");
    for (std::size_t f = 0; f < dim; ++f) x(i, f) = vectors[i][f];
  }
  const Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;
  const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n - 1);
  const double total = cov.trace();
  if (!(total > 0)) {
    throw ValidationError("degenerate input: zero variance, PCA undefined");
  }

  Projection2D p;
  p.mean.assign(mean.data(), mean.data() + mean.size());
  std::vector<Eigen::VectorXd> found;
  for (int axis = 0; axis < 2; ++axis) {
    auto deflate = [&](Eigen::VectorXd& v) {
      for (const auto& u : found) v -= u.dot(v) * u;
    };
    // Start from the largest deflated covariance column.
    Eigen::MatrixXd residual = cov;
    for (const auto& u : found) {
      residual -= (u.transpose() * cov * u)(0) * u * u.transpose();
    }
    Eigen::Index col = 0;
    residual.colwise().norm().maxCoeff(&col);
    Eigen::VectorXd v = residual.col(col);
    deflate(v);
    double eigenvalue = 0;
    if (v.norm() <= 1e-300) {
      // No variance left: any unit vector orthogonal to the found axes.
      for (Eigen::Index e = 0; e < v.size(); ++e) {
        v = Eigen::VectorXd::Unit(v.size(), e);
        deflate(v);
        if (v.norm() > 1e-6) break;
      }
      v.normalize();
    } else {
      v.normalize();
      for (std::size_t iter = 0; iter < kMaxPowerIterations; ++iter) {
        Eigen::VectorXd next = cov * v;
        deflate(next);
        const double norm = next.norm();
        if (norm <= 1e-300) break;
        next /= norm;
        const double change = (next - v).norm();
        v = std::move(next);
        if (change < kPowerTolerance) break;
      }
      eigenvalue = v.dot(cov * v);
    }
    Eigen::Index big = 0;
    v.cwiseAbs().maxCoeff(&big);
    if (v(big) < 0) v = -v;
    p.axes[axis].assign(v.data(), v.data() + v.size());
    p.eigenvalues[axis] = std::max(0.0, eigenvalue);
    p.explained[axis] = p.eigenvalues[axis] / total;
    found.push_back(std::move(v));
  }
  p.coords.resize(vectors.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    p.coords[i] = {x.row(i).dot(found[0]), x.row(i).dot(found[1])};
  }
  return p;
}

ClusterMatch match_clusters(std::span<const std::size_t> assignment,
                            std::span<const int> labels) {
  if (assignment.size() != labels.size()) {
    throw ValidationError("assignment length " +
                          std::to_string(assignment.size()) +
                          " differs from label count " +
                          std::to_string(labels.size()));
  }
  if (assignment.empty()) throw ValidationError("nothing to match");
  const std::set<std::size_t> cluster_set(assignment.begin(),
                                          assignment.end());
  const std::set<int> label_set(labels.begin(), labels.end());
  if (cluster_set.size() > kMaxMatchedClasses ||
      label_set.size() > kMaxMatchedClasses) {
    throw ValidationError(
        "permutation matching supports at most 6 clusters and 6 labels");
  }
  const std::vector<std::size_t> clusters(cluster_set.begin(),
                                          cluster_set.end());
  const std::vector<int> label_ids(label_set.begin(), label_set.end());
  // table[c][l] = items in cluster c with label l.
  std::vector<std::vector<std::size_t>> table(
      clusters.size(), std::vector<std::size_t>(label_ids.size(), 0));
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    const auto c = std::lower_bound(clusters.begin(), clusters.end(),
                                    assignment[i]) - clusters.begin();
    const auto l = std::lower_bound(label_ids.begin(), label_ids.end(),
                                    labels[i]) - label_ids.begin();
    ++table[c][l];
  }
  // Permute slots of the larger side; slot j pairs with index j of the
  // smaller side.
  const std::size_t width = std::max(clusters.size(), label_ids.size());
  std::vector<std::size_t> perm(width);
  std::iota(perm.begin(), perm.end(), 0);
  std::size_t best = 0;
  std::vector<std::size_t> best_perm = perm;
  do {
    std::size_t correct = 0;
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      for (std::size_t l = 0; l < label_ids.size(); ++l) {
        if (perm[c] == l) correct += table[c][l];
      }
    }
    if (correct > best) {
      best = correct;
      best_perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  ClusterMatch match;
  match.accuracy =
      static_cast<double>(best) / static_cast<double>(assignment.size());
  match.label_of_cluster.assign(clusters.back() + 1, -1);
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    if (best_perm[c] < label_ids.size()) {
      match.label_of_cluster[clusters[c]] = label_ids[best_perm[c]];
    }
  }
  return match;
}

double cluster_accuracy(std::span<const std::size_t> assignment,
                        std::span<const int> labels) {
  return match_clusters(assignment, labels).accuracy;
}

void write_scatter_csv(std::ostream& out, const Projection2D& projection,
                       const Clustering& clustering,
                       std::span<const int> labels,
                       std::span<const std::string> label_names,
                       std::span<const std::string> chunk_ids) {
  const std::size_t n = clustering.assignment.size();
  if (projection.coords.size() != n || labels.size() != n ||
      chunk_ids.size() != n) {
    throw ValidationError("scatter inputs have different lengths");
  }
  const ClusterMatch match = match_clusters(clustering.assignment, labels);
  out << "chunk_id,x,y,cluster,true_label,correct\n";
  for (std::size_t i = 0; i < n; ++i) {
    const auto label = static_cast<std::size_t>(labels[i]);
    const std::string name = label < label_names.size()
                                 ? label_names[label]
                                 : std::to_string(labels[i]);
    const bool correct =
        match.label_of_cluster[clustering.assignment[i]] == labels[i];
    out << csv_field(chunk_ids[i]) << ','
        << format_double(projection.coords[i][0]) << ','
        << format_double(projection.coords[i][1]) << ','
        << clustering.assignment[i] << ',' << csv_field(name) << ','
        << (correct ? 1 : 0) << '\n';
  }
}

}  // namespace varieties
