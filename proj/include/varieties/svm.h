#ifndef VARIETIES_SVM_H_
#define VARIETIES_SVM_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "varieties/corpus.h"
#include "varieties/features.h"
#include "varieties/lexicons.h"

namespace varieties {

enum class Scaling {
  kNone,
  // Per-feature min-max scaling to [0, 1], fitted on the training rows.
  kMinMax,
};

struct SvmOptions {
  double C = 1.0;
  // Stopping threshold on the maximal KKT violation.
  double tol = 1e-3;
  // Iteration budget, in multiples of the number of examples.
  std::size_t max_passes = 1000;
  // Called with the dual objective after every pair update.
  std::function<void(double)> on_step;
  // Input scaling applied by train_multiclass; train_binary never scales.
  Scaling scaling = Scaling::kMinMax;
};

// Affine per-feature map x -> (x - min) / range; constant features map to
// 0. An empty scaler is the identity.
struct MinMaxScaler {
  std::vector<double> min;
  std::vector<double> range;

  static MinMaxScaler fit(std::span<const std::vector<double>> rows);
  bool empty() const { return min.empty(); }
  std::vector<double> apply(std::span<const double> x) const;
};

// Linear SVM trained by SMO. The decision function is w.x + bias; a
// non-negative decision value predicts `positive_label`.
struct SvmModel {
  std::vector<double> weights;
  double bias = 0.0;
  double C = 1.0;
  std::vector<double> alphas;
  int positive_label = 0;
  int negative_label = 1;
  std::vector<std::string> feature_names;
  std::size_t iterations = 0;
  double dual_objective = 0.0;

  std::size_t dimension() const { return weights.size(); }
};

struct Prediction {
  int label;
  double decision;
};

// `labels` must contain exactly two distinct values; the smaller one
// becomes the positive class. Throws ValidationError on single-class input
// or ragged rows, ConvergenceError when the iteration budget runs out.
SvmModel train_binary(std::span<const std::vector<double>> rows,
                      std::span<const int> labels,
                      const SvmOptions& options = {});

// Throws ValidationError on dimension mismatch.
Prediction predict(const SvmModel& model, std::span<const double> x);

// Dual objective sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j <x_i, x_j>
// recomputed from scratch.
double dual_objective(std::span<const std::vector<double>> rows,
                      std::span<const int> labels, const SvmModel& model);

// One binary model per unordered label pair, majority vote.
struct OneVsOneModel {
  std::vector<int> labels;  // ascending
  std::vector<SvmModel> models;  // pairs (labels[a], labels[b]), a < b
  MinMaxScaler scaler;  // applied to inputs before every binary model
};

OneVsOneModel train_multiclass(std::span<const std::vector<double>> rows,
                               std::span<const int> labels,
                               const SvmOptions& options = {});

// Vote; ties go to the class with the largest summed |decision| over its
// winning votes, then to the smallest label.
int predict_multiclass(const OneVsOneModel& model, std::span<const double> x);

struct CvReport {
  std::vector<int> labels;  // ascending; indexes the confusion matrix
  std::vector<double> fold_accuracy;
  std::vector<std::size_t> fold_size;
  double mean_accuracy = 0.0;
  // confusion[true][predicted], indexed like `labels`.
  std::vector<std::vector<std::size_t>> confusion;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;

  std::size_t evaluated() const;
};

// Stratified fold assignment: each class is shuffled and dealt round-robin,
// continuing the deal across classes.
std::vector<std::size_t> stratified_folds(std::span<const int> labels,
                                          std::size_t folds,
                                          std::uint64_t seed);

// Cross-validation over fixed vectors.
CvReport cross_validate(std::span<const std::vector<double>> rows,
                        std::span<const int> labels, std::size_t folds,
                        std::uint64_t seed, const SvmOptions& options = {});

// Cross-validation over chunks. Feature spaces that depend on data (POS
// trigram selection, positional vocabulary) are rebuilt on every training
// split.
CvReport cross_validate(std::span<const Chunk> chunks,
                        std::span<const int> labels,
                        const FeatureSetSpec& features,
                        const ResourceBundle& resources, std::size_t folds,
                        std::uint64_t seed, const SvmOptions& options = {});

struct RankedFeature {
  std::string name;
  double weight;
};

// Sorted by |weight| descending, stable for equal magnitudes. Positive
// weights favor the positive label.
std::vector<RankedFeature> rank_features(const SvmModel& model);

void write_model(const SvmModel& model, std::ostream& out);
SvmModel read_model(std::istream& in, const std::string& source);

// Ensemble format: header, label list, scaling block, then every binary
// model in write_model format.
void write_model(const OneVsOneModel& model, std::ostream& out);
OneVsOneModel read_ensemble(std::istream& in, const std::string& source);

}  // namespace varieties

#endif  // VARIETIES_SVM_H_
