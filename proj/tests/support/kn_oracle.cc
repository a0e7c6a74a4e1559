#include "kn_oracle.h"

#include <algorithm>
#include <set>

namespace varieties::testing {
namespace {

const std::string kBos = "<s>";
const std::string kEos = "</s>";

}  // namespace

KnOracle::KnOracle(const std::vector<Seq>& sentences, const Seq& tags,
                   int order)
    : order_(order), vocab_(tags) {
  vocab_.push_back(kEos);
  for (const Seq& s : sentences) {
    Seq padded(order - 1, kBos);
    padded.insert(padded.end(), s.begin(), s.end());
    padded.push_back(kEos);
    for (std::size_t i = 0; i < padded.size(); ++i) {
      for (int m = 1; m <= order && i + m <= padded.size(); ++m) {
        ++raw_[Seq(padded.begin() + i, padded.begin() + i + m)];
      }
    }
  }
  for (int m = 1; m <= order; ++m) {
    std::array<long, 5> n{};
    for (const auto& [g, c] : raw_) {
      if (static_cast<int>(g.size()) != m || g.back() == kBos) continue;
      const long a = adjusted(g);
      if (a >= 1 && a <= 4) ++n[a];
    }
    std::array<double, 3> d = {0.5, 0.5, 0.5};
    if (n[1] > 0 && n[2] > 0) {
      const double y = static_cast<double>(n[1]) / (n[1] + 2.0 * n[2]);
      std::array<double, 3> est{};
      bool ok = true;
      for (int k = 1; k <= 3; ++k) {
        if (n[k] == 0) {
          ok = false;
          break;
        }
        est[k - 1] = k - (k + 1) * y * n[k + 1] / static_cast<double>(n[k]);
        ok = ok && est[k - 1] > 0 && est[k - 1] < k;
      }
      if (ok) d = est;
    }
    discounts_.push_back(d);
  }
}

long KnOracle::raw(const Seq& g) const {
  const auto it = raw_.find(g);
  return it == raw_.end() ? 0 : it->second;
}

long KnOracle::adjusted(const Seq& g) const {
  if (static_cast<int>(g.size()) == order_ || g.front() == kBos) return raw(g);
  // Distinct left extensions, the begin marker included.
  long distinct = 0;
  Seq left = vocab_;
  left.push_back(kBos);
  for (const std::string& x : left) {
    Seq ext = {x};
    ext.insert(ext.end(), g.begin(), g.end());
    distinct += raw(ext) > 0;
  }
  return distinct;
}

double KnOracle::prob(const Seq& context, const std::string& word) const {
  const int m = static_cast<int>(context.size()) + 1;
  const auto& d = discounts_[m - 1];
  auto discount = [&](long a) { return a == 0 ? 0.0 : d[std::min(a, 3L) - 1]; };
  double total = 0, gamma_mass = 0, mine = 0;
  for (const std::string& v : vocab_) {
    Seq g = context;
    g.push_back(v);
    const long a = adjusted(g);
    total += a;
    gamma_mass += discount(a);
    if (v == word) mine = std::max(a - discount(a), 0.0);
  }
  if (m == 1) {
    return mine / total + (gamma_mass / total) / vocab_.size();
  }
  const Seq shorter(context.begin() + 1, context.end());
  if (total == 0) return prob(shorter, word);
  return mine / total + (gamma_mass / total) * prob(shorter, word);
}

std::vector<KnOracle::Seq> KnOracle::contexts() const {
  std::set<Seq> out = {Seq{}};
  for (const auto& [g, c] : raw_) {
    if (static_cast<int>(g.size()) < order_) out.insert(g);
  }
  return {out.begin(), out.end()};
}

}  // namespace varieties::testing
