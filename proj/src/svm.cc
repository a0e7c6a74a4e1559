#include "varieties/svm.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "varieties/error.h"
#include "varieties/rng.h"

namespace varieties {
namespace {

constexpr double kTau = 1e-12;
// Above this many examples kernel rows are computed on demand instead of
// materializing the full Gram matrix.
constexpr std::size_t kFullGramLimit = 6000;

std::size_t check_rows(std::span<const std::vector<double>> rows,
                       std::span<const int> labels) {
  if (rows.size() != labels.size()) {
    throw ValidationError("row count " + std::to_string(rows.size()) +
                          " differs from label count " +
                          std::to_string(labels.size()));
  }
  if (rows.empty()) throw ValidationError("no training examples");
  const std::size_t dim = rows.front().size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != dim) {
      throw ValidationError("example " + std::to_string(i) + " has dimension " +
                            std::to_string(rows[i].size()) + ", expected " +
                            std::to_string(dim));
    }
  }
  return dim;
}

Eigen::MatrixXd to_matrix(std::span<const std::vector<double>> rows,
                          std::size_t dim) {
  Eigen::MatrixXd x(rows.size(), dim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < dim; ++j) x(i, j) = rows[i][j];
  }
  return x;
}

// Kernel access for the linear kernel.
class LinearKernel {
 public:
  explicit LinearKernel(Eigen::MatrixXd x) : x_(std::move(x)) {
    if (x_.rows() <= static_cast<Eigen::Index>(kFullGramLimit)) {
      gram_ = x_ * x_.transpose();
      full_ = true;
    }
    diag_ = x_.rowwise().squaredNorm();
  }

  double diag(std::size_t i) const { return diag_(i); }

  // Writes K(i, .) into `out`.
  void row(std::size_t i, Eigen::VectorXd& out) const {
    if (full_) {
      out = gram_.row(i).transpose();
    } else {
      out = x_ * x_.row(i).transpose();
    }
  }

  const Eigen::MatrixXd& data() const { return x_; }

 private:
  Eigen::MatrixXd x_;
  Eigen::MatrixXd gram_;
  Eigen::VectorXd diag_;
  bool full_ = false;
};

}  // namespace

SvmModel train_binary(std::span<const std::vector<double>> rows,
                      std::span<const int> labels,
                      const SvmOptions& options) {
  const std::size_t dim = check_rows(rows, labels);
  if (!(options.C > 0)) throw ValidationError("C must be positive");
  if (!(options.tol > 0)) throw ValidationError("tol must be positive");
  const std::set<int> distinct(labels.begin(), labels.end());
  if (distinct.size() != 2) {
    throw ValidationError("binary SVM needs exactly two labels, got " +
                          std::to_string(distinct.size()));
  }
  SvmModel model;
  model.C = options.C;
  model.positive_label = *distinct.begin();
  model.negative_label = *distinct.rbegin();

  const std::size_t n = rows.size();
  const double C = options.C;
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = labels[i] == model.positive_label ? 1.0 : -1.0;
  }
  const LinearKernel kernel(to_matrix(rows, dim));

  // Minimizes f(a) = 1/2 a'Qa - e'a with Q_ij = y_i y_j K_ij, subject to
  // 0 <= a <= C and y'a = 0. G holds the gradient Qa - e.
  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);
  Eigen::VectorXd ki(n), kj(n);

  auto in_up = [&](std::size_t t) {
    return (y[t] > 0 && alpha[t] < C) || (y[t] < 0 && alpha[t] > 0);
  };
  auto in_low = [&](std::size_t t) {
    return (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < C);
  };
  auto objective = [&] {
    double f = 0;
    for (std::size_t t = 0; t < n; ++t) f += alpha[t] * (grad[t] - 1.0);
    return -0.5 * f;
  };

  const std::size_t max_iter =
      options.max_passes * std::max<std::size_t>(n, 100);
  std::size_t iter = 0;
  while (true) {
    // Maximal violating pair.
    double gmax = -std::numeric_limits<double>::infinity();
    double gmin = std::numeric_limits<double>::infinity();
    std::size_t i = n, j = n;
    for (std::size_t t = 0; t < n; ++t) {
      const double v = -y[t] * grad[t];
      if (in_up(t) && v > gmax) {
        gmax = v;
        i = t;
      }
      if (in_low(t) && v < gmin) {
        gmin = v;
        j = t;
      }
    }
    if (i == n || j == n || gmax - gmin <= options.tol) break;
    if (iter >= max_iter) {
      throw ConvergenceError(
          "SMO did not converge within " + std::to_string(max_iter) +
          " iterations (max violation " + std::to_string(gmax - gmin) + ")");
    }
    ++iter;

    kernel.row(i, ki);
    kernel.row(j, kj);
    const double old_ai = alpha[i], old_aj = alpha[j];
    // Two-variable subproblem, clipped to the box (libsvm's update rule).
    if (y[i] != y[j]) {
      double quad = kernel.diag(i) + kernel.diag(j) - 2.0 * ki(j);
      if (quad <= 0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) {
          alpha[j] = 0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0) {
        alpha[i] = 0;
        alpha[j] = -diff;
      }
      if (diff > 0) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = C - diff;
        }
      } else if (alpha[j] > C) {
        alpha[j] = C;
        alpha[i] = C + diff;
      }
    } else {
      double quad = kernel.diag(i) + kernel.diag(j) - 2.0 * ki(j);
      if (quad <= 0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = sum - C;
        }
      } else if (alpha[j] < 0) {
        alpha[j] = 0;
        alpha[i] = sum;
      }
      if (sum > C) {
        if (alpha[j] > C) {
          alpha[j] = C;
          alpha[i] = sum - C;
        }
      } else if (alpha[i] < 0) {
        alpha[i] = 0;
        alpha[j] = sum;
      }
    }
    const double dai = alpha[i] - old_ai, daj = alpha[j] - old_aj;
    for (std::size_t t = 0; t < n; ++t) {
      grad[t] += y[t] * (y[i] * ki(t) * dai + y[j] * kj(t) * daj);
    }
    if (options.on_step) options.on_step(objective());
  }

  // Offset from the free support vectors, or the midpoint of the feasible
  // interval when every alpha sits at a bound.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (alpha[t] >= C) {
      if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0) {
      if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free)
                                : (ub + lb) / 2.0;

  Eigen::VectorXd coef(n);
  for (std::size_t t = 0; t < n; ++t) coef(t) = alpha[t] * y[t];
  const Eigen::VectorXd w = kernel.data().transpose() * coef;
  model.weights.assign(w.data(), w.data() + w.size());
  model.bias = -rho;
  model.dual_objective = objective();
  model.alphas = std::move(alpha);
  model.iterations = iter;
  return model;
}

Prediction predict(const SvmModel& model, std::span<const double> x) {
  if (x.size() != model.dimension()) {
    throw ValidationError("input dimension " + std::to_string(x.size()) +
                          " does not match model dimension " +
                          std::to_string(model.dimension()));
  }
  double d = model.bias;
  for (std::size_t i = 0; i < x.size(); ++i) d += model.weights[i] * x[i];
  return {d >= 0 ? model.positive_label : model.negative_label, d};
}

double dual_objective(std::span<const std::vector<double>> rows,
                      std::span<const int> labels, const SvmModel& model) {
  const std::size_t n = rows.size();
  double linear = 0, quad = 0;
  for (std::size_t i = 0; i < n; ++i) {
    linear += model.alphas[i];
    const double yi = labels[i] == model.positive_label ? 1.0 : -1.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double yj = labels[j] == model.positive_label ? 1.0 : -1.0;
      double k = 0;
      for (std::size_t f = 0; f < rows[i].size(); ++f) {
        k += rows[i][f] * rows[j][f];
      }
      quad += model.alphas[i] * model.alphas[j] * yi * yj * k;
    }
  }
  return linear - 0.5 * quad;
}

MinMaxScaler MinMaxScaler::fit(std::span<const std::vector<double>> rows) {
  MinMaxScaler s;
  if (rows.empty()) return s;
  const std::size_t dim = rows.front().size();
  s.min = rows.front();
  std::vector<double> max = rows.front();
  for (const auto& r : rows) {
    for (std::size_t f = 0; f < dim; ++f) {
      s.min[f] = std::min(s.min[f], r[f]);
      max[f] = std::max(max[f], r[f]);
    }
  }
  s.range.resize(dim);
  for (std::size_t f = 0; f < dim; ++f) s.range[f] = max[f] - s.min[f];
  return s;
}

std::vector<double> MinMaxScaler::apply(std::span<const double> x) const {
  if (empty()) return {x.begin(), x.end()};
  if (x.size() != min.size()) {
    throw ValidationError("input dimension " + std::to_string(x.size()) +
                          " does not match scaler dimension " +
                          std::to_string(min.size()));
  }
  std::vector<double> out(x.size());
  for (std::size_t f = 0; f < x.size(); ++f) {
    out[f] = range[f] > 0 ? (x[f] - min[f]) / range[f] : 0.0;
  }
  return out;
}

OneVsOneModel train_multiclass(std::span<const std::vector<double>> rows,
                               std::span<const int> labels,
                               const SvmOptions& options) {
  check_rows(rows, labels);
  OneVsOneModel ovo;
  std::vector<std::vector<double>> scaled;
  if (options.scaling == Scaling::kMinMax) {
    ovo.scaler = MinMaxScaler::fit(rows);
    scaled.reserve(rows.size());
    for (const auto& r : rows) scaled.push_back(ovo.scaler.apply(r));
    rows = scaled;
  }
  const std::set<int> distinct(labels.begin(), labels.end());
  ovo.labels.assign(distinct.begin(), distinct.end());
  if (ovo.labels.size() < 2) {
    throw ValidationError("classification needs at least two labels");
  }
  for (std::size_t a = 0; a < ovo.labels.size(); ++a) {
    for (std::size_t b = a + 1; b < ovo.labels.size(); ++b) {
      std::vector<std::vector<double>> sub_rows;
      std::vector<int> sub_labels;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (labels[i] == ovo.labels[a] || labels[i] == ovo.labels[b]) {
          sub_rows.push_back(rows[i]);
          sub_labels.push_back(labels[i]);
        }
      }
      ovo.models.push_back(train_binary(sub_rows, sub_labels, options));
    }
  }
  return ovo;
}

int predict_multiclass(const OneVsOneModel& model, std::span<const double> x) {
  const std::size_t k = model.labels.size();
  std::vector<int> votes(k, 0);
  std::vector<double> strength(k, 0.0);
  const std::vector<double> input = model.scaler.apply(x);
  auto index_of = [&](int label) {
    return static_cast<std::size_t>(
        std::lower_bound(model.labels.begin(), model.labels.end(), label) -
        model.labels.begin());
  };
  for (const SvmModel& m : model.models) {
    const Prediction p = predict(m, input);
    const std::size_t w = index_of(p.label);
    ++votes[w];
    strength[w] += std::abs(p.decision);
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < k; ++c) {
    if (votes[c] > votes[best] ||
        (votes[c] == votes[best] && strength[c] > strength[best])) {
      best = c;
    }
  }
  return model.labels[best];
}

std::size_t CvReport::evaluated() const {
  std::size_t total = 0;
  for (const auto& row : confusion) {
    total = std::accumulate(row.begin(), row.end(), total);
  }
  return total;
}

std::vector<std::size_t> stratified_folds(std::span<const int> labels,
                                          std::size_t folds,
                                          std::uint64_t seed) {
  if (folds < 2) throw ValidationError("need at least two folds");
  if (labels.size() < folds) {
    throw ValidationError("fewer examples (" + std::to_string(labels.size()) +
                          ") than folds (" + std::to_string(folds) + ")");
  }
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    by_class[labels[i]].push_back(i);
  }
  std::vector<std::size_t> fold(labels.size());
  std::size_t deal = 0;
  for (auto& [label, members] : by_class) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(label)));
    rng.shuffle(std::span<std::size_t>(members));
    for (std::size_t idx : members) fold[idx] = deal++ % folds;
  }
  return fold;
}

namespace {

CvReport make_report(std::span<const int> labels, std::size_t folds,
                     std::uint64_t seed) {
  CvReport report;
  const std::set<int> distinct(labels.begin(), labels.end());
  report.labels.assign(distinct.begin(), distinct.end());
  report.seed = seed;
  report.confusion.assign(report.labels.size(),
                          std::vector<std::size_t>(report.labels.size(), 0));
  std::map<int, std::size_t> counts;
  for (int l : labels) ++counts[l];
  std::size_t lo = SIZE_MAX, hi = 0;
  for (const auto& [l, c] : counts) {
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  if (hi > lo + lo / 10) {
    report.warnings.push_back("unbalanced classes: sizes range from " +
                              std::to_string(lo) + " to " +
                              std::to_string(hi));
  }
  report.fold_accuracy.reserve(folds);
  return report;
}

// Runs the fold loop; `train_and_predict` gets train/test index lists and
// returns predicted labels for the test indices.
template <typename Fn>
CvReport run_folds(std::span<const int> labels, std::size_t folds,
                   std::uint64_t seed, Fn&& train_and_predict) {
  CvReport report = make_report(labels, folds, seed);
  const auto assignment = stratified_folds(labels, folds, seed);
  auto index_of = [&](int label) {
    return static_cast<std::size_t>(
        std::lower_bound(report.labels.begin(), report.labels.end(), label) -
        report.labels.begin());
  };
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      (assignment[i] == f ? test : train).push_back(i);
    }
    if (test.empty()) continue;
    const std::vector<int> predicted = train_and_predict(train, test);
    std::size_t correct = 0;
    for (std::size_t t = 0; t < test.size(); ++t) {
      const int truth = labels[test[t]];
      correct += predicted[t] == truth;
      ++report.confusion[index_of(truth)][index_of(predicted[t])];
    }
    report.fold_accuracy.push_back(static_cast<double>(correct) /
                                   static_cast<double>(test.size()));
    report.fold_size.push_back(test.size());
  }
  report.mean_accuracy =
      std::accumulate(report.fold_accuracy.begin(),
                      report.fold_accuracy.end(), 0.0) /
      static_cast<double>(report.fold_accuracy.size());
  return report;
}

}  // namespace

CvReport cross_validate(std::span<const std::vector<double>> rows,
                        std::span<const int> labels, std::size_t folds,
                        std::uint64_t seed, const SvmOptions& options) {
  check_rows(rows, labels);
  return run_folds(labels, folds, seed,
                   [&](const std::vector<std::size_t>& train,
                       const std::vector<std::size_t>& test) {
                     std::vector<std::vector<double>> x;
                     std::vector<int> y;
                     for (std::size_t i : train) {
                       x.push_back(rows[i]);
                       y.push_back(labels[i]);
                     }
                     const OneVsOneModel model =
                         train_multiclass(x, y, options);
                     std::vector<int> out;
                     for (std::size_t i : test) {
                       out.push_back(predict_multiclass(model, rows[i]));
                     }
                     return out;
                   });
}

CvReport cross_validate(std::span<const Chunk> chunks,
                        std::span<const int> labels,
                        const FeatureSetSpec& features,
                        const ResourceBundle& resources, std::size_t folds,
                        std::uint64_t seed, const SvmOptions& options) {
  if (chunks.size() != labels.size()) {
    throw ValidationError("chunk count differs from label count");
  }
  return run_folds(
      labels, folds, seed,
      [&](const std::vector<std::size_t>& train,
          const std::vector<std::size_t>& test) {
        std::vector<Chunk> training;
        training.reserve(train.size());
        for (std::size_t i : train) training.push_back(chunks[i]);
        const auto spaces = build_spaces(features, training, resources);
        std::vector<std::vector<double>> x;
        std::vector<int> y;
        for (std::size_t i : train) {
          x.push_back(vectorize(chunks[i].view(), spaces));
          y.push_back(labels[i]);
        }
        const OneVsOneModel model = train_multiclass(x, y, options);
        std::vector<int> out;
        for (std::size_t i : test) {
          out.push_back(
              predict_multiclass(model, vectorize(chunks[i].view(), spaces)));
        }
        return out;
      });
}

std::vector<RankedFeature> rank_features(const SvmModel& model) {
  std::vector<RankedFeature> ranked;
  ranked.reserve(model.dimension());
  for (std::size_t i = 0; i < model.dimension(); ++i) {
    ranked.push_back({i < model.feature_names.size()
                          ? model.feature_names[i]
                          : "f" + std::to_string(i),
                      model.weights[i]});
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const RankedFeature& a, const RankedFeature& b) {
                     return std::abs(a.weight) > std::abs(b.weight);
                   });
  return ranked;
}

void write_model(const SvmModel& model, std::ostream& out) {
  out << "varieties-svm 1\n";
  out << "dimension " << model.dimension() << '\n';
  out << "C " << format_double(model.C) << '\n';
  out << "labels " << model.positive_label << ' ' << model.negative_label
      << '\n';
  for (std::size_t i = 0; i < model.dimension(); ++i) {
    const std::string name = i < model.feature_names.size()
                                 ? model.feature_names[i]
                                 : "f" + std::to_string(i);
    out << name << '\t' << format_double(model.weights[i]) << '\n';
  }
  out << "bias " << format_double(model.bias) << '\n';
}

SvmModel read_model(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  auto next = [&](const char* what) {
    if (!std::getline(in, line)) {
      throw ParseError(source, line_no + 1, std::string("missing ") + what);
    }
    ++line_no;
  };
  auto keyed = [&](const char* key) {
    next(key);
    std::istringstream ss(line);
    std::string k;
    ss >> k;
    if (k != key) {
      throw ParseError(source, line_no, std::string("expected '") + key + "'");
    }
    std::string rest;
    std::getline(ss, rest);
    return rest;
  };
  next("header");
  if (line != "varieties-svm 1") {
    throw ParseError(source, line_no, "unsupported model header '" + line + "'");
  }
  SvmModel model;
  std::size_t dim = 0;
  try {
    dim = std::stoul(keyed("dimension"));
    model.C = std::stod(keyed("C"));
    std::istringstream lbl(keyed("labels"));
    if (!(lbl >> model.positive_label >> model.negative_label)) {
      throw ParseError(source, line_no, "malformed labels");
    }
    for (std::size_t i = 0; i < dim; ++i) {
      next("weight line");
      const auto tab = line.rfind('\t');
      if (tab == std::string::npos) {
        throw ParseError(source, line_no, "expected name<TAB>weight");
      }
      model.feature_names.push_back(line.substr(0, tab));
      model.weights.push_back(std::stod(line.substr(tab + 1)));
    }
    model.bias = std::stod(keyed("bias"));
  } catch (const std::invalid_argument&) {
    throw ParseError(source, line_no, "malformed number");
  } catch (const std::out_of_range&) {
    throw ParseError(source, line_no, "number out of range");
  }
  return model;
}

void write_model(const OneVsOneModel& model, std::ostream& out) {
  out << "varieties-ovo 1\n";
  out << "labels";
  for (int l : model.labels) out << ' ' << l;
  out << '\n';
  if (model.scaler.empty()) {
    out << "scaling none\n";
  } else {
    out << "scaling minmax " << model.scaler.min.size() << '\n';
    for (std::size_t f = 0; f < model.scaler.min.size(); ++f) {
      out << format_double(model.scaler.min[f]) << '\t'
          << format_double(model.scaler.range[f]) << '\n';
    }
  }
  for (const SvmModel& m : model.models) write_model(m, out);
}

OneVsOneModel read_ensemble(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  auto next = [&](const char* what) {
    if (!std::getline(in, line)) {
      throw ParseError(source, line_no + 1, std::string("missing ") + what);
    }
    ++line_no;
  };
  next("header");
  if (line != "varieties-ovo 1") {
    throw ParseError(source, line_no,
                     "unsupported ensemble header '" + line + "'");
  }
  OneVsOneModel model;
  next("labels");
  {
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key != "labels") throw ParseError(source, line_no, "expected labels");
    for (int l; ss >> l;) model.labels.push_back(l);
    if (model.labels.size() < 2 ||
        !std::is_sorted(model.labels.begin(), model.labels.end())) {
      throw ParseError(source, line_no, "need two or more ascending labels");
    }
  }
  next("scaling");
  {
    std::istringstream ss(line);
    std::string key, kind;
    ss >> key >> kind;
    if (key != "scaling") throw ParseError(source, line_no, "expected scaling");
    if (kind == "minmax") {
      std::size_t dim = 0;
      if (!(ss >> dim)) throw ParseError(source, line_no, "missing dimension");
      for (std::size_t f = 0; f < dim; ++f) {
        next("scaling row");
        std::istringstream row(line);
        double lo, range;
        if (!(row >> lo >> range)) {
          throw ParseError(source, line_no, "expected min<TAB>range");
        }
        model.scaler.min.push_back(lo);
        model.scaler.range.push_back(range);
      }
    } else if (kind != "none") {
      throw ParseError(source, line_no, "unknown scaling '" + kind + "'");
    }
  }
  const std::size_t k = model.labels.size();
  // Each binary block reports its own line numbers relative to its start.
  for (std::size_t m = 0; m < k * (k - 1) / 2; ++m) {
    model.models.push_back(
        read_model(in, source + " (model " + std::to_string(m) + ")"));
  }
  return model;
}

}  // namespace varieties
