#pragma once
// Order-of-reflection classifier: CART trees grown on Gini impurity and a
// bootstrap-aggregated ensemble of them with majority voting.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "oori/channel.hpp"
#include "oori/csv.hpp"
#include "oori/errors.hpp"
#include "oori/parallel.hpp"

namespace oori {

inline constexpr std::size_t kNumFeatures = 4;
using Features = std::array<double, kNumFeatures>;
inline const std::array<std::string, kNumFeatures> kFeatureNames{"toa_s", "aoa_deg", "aod_deg",
                                                                 "rss_dbm"};

struct FeatureRow {
  Features features{};
  std::optional<int> label;
};

inline FeatureRow to_feature_row(const Measurement& m) {
  return {{m.toa, m.aoa.degrees(), m.aod.degrees(), m.rss}, m.label};
}

inline std::vector<FeatureRow> to_feature_rows(const std::vector<Measurement>& ms) {
  std::vector<FeatureRow> out;
  out.reserve(ms.size());
  for (const auto& m : ms) out.push_back(to_feature_row(m));
  return out;
}

struct TreeParams {
  int max_depth{20};  ///< <= 0 means unlimited
  int min_leaf_size{5};
};

struct TreeNode {
  int feature{-1};  ///< -1 for leaves
  double threshold{0.0};
  int left{-1};
  int right{-1};
  std::vector<std::uint32_t> counts;  ///< leaves only

  [[nodiscard]] bool leaf() const { return feature < 0; }
};

/// Index of the largest count; ties resolve to the lowest class.
inline int argmax_lowest(const std::vector<std::uint32_t>& counts) {
  int best = 0;
  for (int c = 1; c < static_cast<int>(counts.size()); ++c) {
    if (counts[c] > counts[best]) best = c;
  }
  return best;
}

class DecisionTree {
 public:
  DecisionTree() = default;
  DecisionTree(std::vector<TreeNode> nodes, int n_classes)
      : nodes_(std::move(nodes)), n_classes_(n_classes) {}

  [[nodiscard]] const std::vector<TreeNode>& nodes() const { return nodes_; }
  [[nodiscard]] int n_classes() const { return n_classes_; }

  [[nodiscard]] const TreeNode& leaf_for(const Features& x) const {
    int i = 0;
    while (!nodes_[i].leaf()) {
      const auto& n = nodes_[i];
      i = x[n.feature] <= n.threshold ? n.left : n.right;
    }
    return nodes_[i];
  }

  [[nodiscard]] int predict(const Features& x) const { return argmax_lowest(leaf_for(x).counts); }

  [[nodiscard]] int depth() const {
    std::vector<int> d(nodes_.size(), 0);
    int best = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      best = std::max(best, d[i]);
      if (!nodes_[i].leaf()) {
        d[nodes_[i].left] = d[i] + 1;
        d[nodes_[i].right] = d[i] + 1;
      }
    }
    return best;
  }

  bool operator==(const DecisionTree& o) const {
    if (n_classes_ != o.n_classes_ || nodes_.size() != o.nodes_.size()) return false;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const auto& a = nodes_[i];
      const auto& b = o.nodes_[i];
      if (a.feature != b.feature || a.threshold != b.threshold || a.left != b.left ||
          a.right != b.right || a.counts != b.counts) {
        return false;
      }
    }
    return true;
  }

 private:
  std::vector<TreeNode> nodes_;
  int n_classes_{0};
};

namespace detail {

inline int infer_n_classes(const std::vector<FeatureRow>& rows) {
  int hi = -1;
  for (const auto& r : rows) {
    if (!r.label) throw DataError("training row without a label");
    if (*r.label < 0) throw DataError("negative class label");
    hi = std::max(hi, *r.label);
  }
  return hi + 1;
}

inline double sum_squares(const std::vector<std::uint32_t>& c) {
  double s = 0.0;
  for (auto v : c) s += static_cast<double>(v) * v;
  return s;
}

/// Greedy CART growth over a multiset of rows (the bootstrap sample). Each
/// feature keeps its own value-sorted copy of the node's samples; splitting
/// a node stably partitions every copy, so sorting happens once per tree.
class TreeBuilder {
 public:
  TreeBuilder(const std::vector<FeatureRow>& rows, const std::vector<std::size_t>& sample,
              const TreeParams& params, int n_classes)
      : params_(params), n_classes_(n_classes), n_(sample.size()) {
    labels_.resize(n_);
    for (std::size_t s = 0; s < n_; ++s) {
      const auto& r = rows[sample[s]];
      if (!r.label || *r.label < 0 || *r.label >= n_classes) {
        throw DataError("row label outside [0, n_classes)");
      }
      labels_[s] = static_cast<std::uint16_t>(*r.label);
    }
    for (std::size_t f = 0; f < kNumFeatures; ++f) {
      auto& col = cols_[f];
      col.resize(n_);
      for (std::size_t s = 0; s < n_; ++s) {
        const double v = rows[sample[s]].features[f];
        if (!std::isfinite(v)) throw DataError("non-finite feature value");
        col[s] = {v, static_cast<std::uint32_t>(s)};
      }
      std::sort(col.begin(), col.end(), [](const Entry& a, const Entry& b) {
        return a.v < b.v || (a.v == b.v && a.sample < b.sample);
      });
    }
    goes_left_.assign(n_, 0);
    scratch_.resize(n_);
  }

  DecisionTree build() {
    if (n_ == 0) throw DataError("cannot grow a tree on zero rows");
    struct Task {
      int node;
      std::size_t lo, hi;
      int depth;
    };
    nodes_.clear();
    nodes_.emplace_back();
    std::vector<Task> stack{{0, 0, n_, 0}};
    while (!stack.empty()) {
      const Task task = stack.back();
      stack.pop_back();
      std::vector<std::uint32_t> counts(n_classes_, 0);
      for (std::size_t i = task.lo; i < task.hi; ++i) ++counts[labels_[cols_[0][i].sample]];
      const std::size_t n = task.hi - task.lo;
      const bool pure = std::count(counts.begin(), counts.end(), 0u) >= n_classes_ - 1;
      const bool depth_done = params_.max_depth > 0 && task.depth >= params_.max_depth;
      const std::size_t min_leaf = static_cast<std::size_t>(std::max(1, params_.min_leaf_size));
      std::optional<Split> split;
      if (!pure && !depth_done && n >= 2 * min_leaf) split = best_split(task.lo, task.hi, counts);
      if (!split) {
        nodes_[task.node].counts = std::move(counts);
        continue;
      }
      const std::size_t mid = partition(task.lo, task.hi, *split);
      const int left = static_cast<int>(nodes_.size());
      nodes_.emplace_back();
      nodes_.emplace_back();
      auto& node = nodes_[task.node];
      node.feature = split->feature;
      node.threshold = split->threshold;
      node.left = left;
      node.right = left + 1;
      stack.push_back({left + 1, mid, task.hi, task.depth + 1});
      stack.push_back({left, task.lo, mid, task.depth + 1});
    }
    return DecisionTree(std::move(nodes_), n_classes_);
  }

 private:
  struct Entry {
    double v;
    std::uint32_t sample;
  };
  struct Split {
    int feature;
    double threshold;
  };

  std::optional<Split> best_split(std::size_t lo, std::size_t hi,
                                  const std::vector<std::uint32_t>& parent) {
    const std::size_t n = hi - lo;
    const std::size_t min_leaf = static_cast<std::size_t>(std::max(1, params_.min_leaf_size));
    std::optional<Split> best;
    // maximizing sum(cL^2)/nL + sum(cR^2)/nR minimizes weighted Gini
    double best_score = -std::numeric_limits<double>::infinity();
    std::vector<std::uint32_t> left(n_classes_);
    std::vector<std::uint32_t> right(n_classes_);
    for (std::size_t f = 0; f < kNumFeatures; ++f) {
      const auto& col = cols_[f];
      if (col[lo].v == col[hi - 1].v) continue;
      std::fill(left.begin(), left.end(), 0u);
      right = parent;
      double sq_left = 0.0;
      double sq_right = sum_squares(parent);
      for (std::size_t i = lo; i + 1 < hi; ++i) {
        const int c = labels_[col[i].sample];
        sq_left += 2.0 * left[c] + 1.0;
        ++left[c];
        sq_right -= 2.0 * right[c] - 1.0;
        --right[c];
        const std::size_t n_left = i - lo + 1;
        if (n_left < min_leaf) continue;
        if (n - n_left < min_leaf) break;
        if (col[i].v == col[i + 1].v) continue;
        const double score = sq_left / static_cast<double>(n_left) +
                             sq_right / static_cast<double>(n - n_left);
        if (score > best_score) {
          best_score = score;
          const double a = col[i].v;
          const double b = col[i + 1].v;
          double mid = a + (b - a) * 0.5;
          if (!(mid >= a && mid < b)) mid = a;
          best = Split{static_cast<int>(f), mid};
        }
      }
    }
    return best;
  }

  std::size_t partition(std::size_t lo, std::size_t hi, const Split& split) {
    std::size_t n_left = 0;
    for (std::size_t i = lo; i < hi; ++i) {
      const auto& e = cols_[split.feature][i];
      const bool l = e.v <= split.threshold;
      goes_left_[e.sample] = l ? 1 : 0;
      n_left += l ? 1 : 0;
    }
    for (auto& col : cols_) {
      std::size_t li = lo;
      std::size_t ri = 0;
      for (std::size_t i = lo; i < hi; ++i) {
        if (goes_left_[col[i].sample]) {
          col[li++] = col[i];
        } else {
          scratch_[ri++] = col[i];
        }
      }
      std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(ri),
                col.begin() + static_cast<std::ptrdiff_t>(li));
    }
    return lo + n_left;
  }

  TreeParams params_;
  int n_classes_;
  std::size_t n_;
  std::vector<std::uint16_t> labels_;
  std::array<std::vector<Entry>, kNumFeatures> cols_;
  std::vector<std::uint8_t> goes_left_;
  std::vector<Entry> scratch_;
  std::vector<TreeNode> nodes_;
};

}  // namespace detail

/// Grows one CART tree on `rows` (all rows, no resampling). `n_classes`
/// of 0 means max label + 1.
inline DecisionTree train_tree(const std::vector<FeatureRow>& rows, const TreeParams& params = {},
                               int n_classes = 0) {
  if (rows.empty()) throw DataError("cannot train on an empty dataset");
  if (n_classes <= 0) n_classes = detail::infer_n_classes(rows);
  std::vector<std::size_t> all(rows.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return detail::TreeBuilder(rows, all, params, n_classes).build();
}

inline DecisionTree train_tree_on_sample(const std::vector<FeatureRow>& rows,
                                         const std::vector<std::size_t>& sample,
                                         const TreeParams& params, int n_classes) {
  return detail::TreeBuilder(rows, sample, params, n_classes).build();
}

struct BaggingParams {
  int n_trees{14};
  TreeParams tree;
  bool bootstrap{true};  ///< false trains every tree on the full set
  unsigned threads{1};
};

struct Prediction {
  int cls{0};
  double vote_fraction{0.0};
};

class Ensemble {
 public:
  Ensemble() = default;
  Ensemble(std::vector<DecisionTree> trees, int n_classes, std::uint64_t master_seed,
           BaggingParams params)
      : trees_(std::move(trees)),
        n_classes_(n_classes),
        master_seed_(master_seed),
        params_(params),
        feature_names_(kFeatureNames.begin(), kFeatureNames.end()) {
    if (trees_.empty()) throw ConfigError("an ensemble needs at least one tree");
    for (const auto& t : trees_) {
      if (t.n_classes() != n_classes_) throw DataError("trees disagree on class count");
    }
  }

  [[nodiscard]] const std::vector<DecisionTree>& trees() const { return trees_; }
  [[nodiscard]] int n_classes() const { return n_classes_; }
  [[nodiscard]] std::uint64_t master_seed() const { return master_seed_; }
  [[nodiscard]] const BaggingParams& params() const { return params_; }
  [[nodiscard]] const std::vector<std::string>& feature_names() const { return feature_names_; }

  /// Majority vote; ties resolve to the lowest class index.
  [[nodiscard]] Prediction predict(const Features& x) const {
    std::vector<std::uint32_t> votes(n_classes_, 0);
    for (const auto& t : trees_) ++votes[t.predict(x)];
    const int cls = argmax_lowest(votes);
    return {cls, static_cast<double>(votes[cls]) / static_cast<double>(trees_.size())};
  }

 private:
  std::vector<DecisionTree> trees_;
  int n_classes_{0};
  std::uint64_t master_seed_{0};
  BaggingParams params_;
  std::vector<std::string> feature_names_;
};

inline Prediction predict(const Ensemble& ensemble, const Features& x) {
  return ensemble.predict(x);
}

/// Bootstrap indices for tree `tree_index`, from its own substream.
inline std::vector<std::size_t> bootstrap_sample(std::size_t n, std::uint64_t master_seed,
                                                 int tree_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(tree_index), 0x62616767u};
  std::mt19937_64 rng(seq);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<std::size_t> out(n);
  for (auto& i : out) i = pick(rng);
  return out;
}

inline Ensemble train_bagged(const std::vector<FeatureRow>& rows, const BaggingParams& params,
                             std::uint64_t master_seed, int n_classes = 0) {
  if (params.n_trees < 1) throw ConfigError("n_trees must be >= 1");
  if (rows.empty()) throw DataError("cannot train on an empty dataset");
  if (n_classes <= 0) n_classes = detail::infer_n_classes(rows);
  std::vector<DecisionTree> trees(params.n_trees);
  parallel_for(trees.size(), params.threads, [&](std::size_t t) {
    std::vector<std::size_t> sample;
    if (params.bootstrap) {
      sample = bootstrap_sample(rows.size(), master_seed, static_cast<int>(t));
    } else {
      sample.resize(rows.size());
      std::iota(sample.begin(), sample.end(), std::size_t{0});
    }
    trees[t] = train_tree_on_sample(rows, sample, params.tree, n_classes);
  });
  return Ensemble(std::move(trees), n_classes, master_seed, params);
}

// ---- data partitioning -----------------------------------------------------

template <class T>
struct DataSplit {
  std::vector<T> train;
  std::vector<T> validation;
  std::vector<T> test;
};

inline std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

/// Shuffle, then cut into train/validation/test by `fractions`.
template <class T>
DataSplit<T> split_dataset(const std::vector<T>& rows, std::array<double, 3> fractions,
                           std::uint64_t seed) {
  if (rows.empty()) throw DataError("cannot split an empty dataset");
  for (double f : fractions) {
    if (!(f >= 0.0)) throw ConfigError("split fractions must be >= 0");
  }
  if (std::abs(fractions[0] + fractions[1] + fractions[2] - 1.0) > 1e-9) {
    throw ConfigError("split fractions must sum to 1");
  }
  const std::size_t n = rows.size();
  const auto n_train = static_cast<std::size_t>(std::llround(fractions[0] * static_cast<double>(n)));
  const auto n_val = std::min(
      n - n_train, static_cast<std::size_t>(std::llround(fractions[1] * static_cast<double>(n))));
  const auto idx = shuffled_indices(n, seed);
  DataSplit<T> out;
  for (std::size_t i = 0; i < n; ++i) {
    auto& dst = i < n_train ? out.train : (i < n_train + n_val ? out.validation : out.test);
    dst.push_back(rows[idx[i]]);
  }
  return out;
}

template <class T>
DataSplit<T> split_dataset(const std::vector<T>& rows, std::uint64_t seed) {
  return split_dataset(rows, {0.6, 0.2, 0.2}, seed);
}

/// Fold sizes for n rows in k folds: the first n % k folds get one extra.
inline std::vector<std::size_t> fold_sizes(std::size_t n, std::size_t k) {
  std::vector<std::size_t> sizes(k, n / k);
  for (std::size_t i = 0; i < n % k; ++i) ++sizes[i];
  return sizes;
}

// ---- scoring -------------------------------------------------------------

class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int n_classes)
      : n_(n_classes), counts_(static_cast<std::size_t>(n_classes) * n_classes, 0) {}

  void add(int truth, int predicted) {
    if (truth < 0 || truth >= n_ || predicted < 0 || predicted >= n_) {
      throw DataError("class index outside the confusion matrix");
    }
    ++counts_[static_cast<std::size_t>(truth) * n_ + predicted];
  }

  [[nodiscard]] int n_classes() const { return n_; }
  /// rows = true class, columns = predicted class
  [[nodiscard]] std::uint64_t at(int truth, int predicted) const {
    return counts_[static_cast<std::size_t>(truth) * n_ + predicted];
  }
  [[nodiscard]] std::uint64_t total() const {
    return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
  }
  [[nodiscard]] std::uint64_t trace() const {
    std::uint64_t s = 0;
    for (int i = 0; i < n_; ++i) s += at(i, i);
    return s;
  }
  [[nodiscard]] double accuracy() const {
    const auto t = total();
    return t == 0 ? 0.0 : static_cast<double>(trace()) / static_cast<double>(t);
  }

  [[nodiscard]] std::string render() const {
    std::ostringstream os;
    os << "true\\pred";
    for (int p = 0; p < n_; ++p) os << '\t' << p;
    os << '\n';
    for (int t = 0; t < n_; ++t) {
      os << t;
      for (int p = 0; p < n_; ++p) os << '\t' << at(t, p);
      os << '\n';
    }
    return os.str();
  }

 private:
  int n_;
  std::vector<std::uint64_t> counts_;
};

inline ConfusionMatrix confusion(const Ensemble& ensemble, const std::vector<FeatureRow>& rows) {
  ConfusionMatrix cm(ensemble.n_classes());
  for (const auto& r : rows) {
    if (!r.label) throw DataError("confusion matrix needs labeled rows");
    if (*r.label >= ensemble.n_classes()) throw DataError("label beyond the model's classes");
    cm.add(*r.label, ensemble.predict(r.features).cls);
  }
  return cm;
}

inline double accuracy(const Ensemble& ensemble, const std::vector<FeatureRow>& rows) {
  return confusion(ensemble, rows).accuracy();
}

struct CvResult {
  std::vector<double> accuracies;
  std::vector<std::size_t> fold_sizes;

  [[nodiscard]] double mean() const {
    return std::accumulate(accuracies.begin(), accuracies.end(), 0.0) /
           static_cast<double>(accuracies.size());
  }
  /// Population standard deviation.
  [[nodiscard]] double stddev() const {
    const double mu = mean();
    double s = 0.0;
    for (double a : accuracies) s += (a - mu) * (a - mu);
    return std::sqrt(s / static_cast<double>(accuracies.size()));
  }
};

/// k-fold cross-validation of the bagged ensemble over shuffled rows.
inline CvResult cross_validate(const std::vector<FeatureRow>& rows, std::size_t k,
                               const BaggingParams& params, std::uint64_t seed) {
  if (k < 2) throw ConfigError("cross-validation needs k >= 2");
  if (k > rows.size()) throw DataError("more folds than rows");
  const int n_classes = detail::infer_n_classes(rows);
  const auto idx = shuffled_indices(rows.size(), seed);
  CvResult out;
  out.fold_sizes = fold_sizes(rows.size(), k);
  std::size_t start = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t end = start + out.fold_sizes[f];
    std::vector<FeatureRow> train;
    std::vector<FeatureRow> held;
    train.reserve(rows.size() - out.fold_sizes[f]);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      (i >= start && i < end ? held : train).push_back(rows[idx[i]]);
    }
    const auto model = train_bagged(train, params, seed + 1 + f, n_classes);
    out.accuracies.push_back(accuracy(model, held));
    start = end;
  }
  return out;
}

/// Keeps paths within `threshold_db` of the strongest one in the epoch.
inline std::vector<Measurement> baseline_rss_filter(const std::vector<Measurement>& ms,
                                                    double threshold_db) {
  if (ms.empty()) throw DataError("RSS filter needs at least one measurement");
  for (const auto& m : ms) {
    if (m.t != ms.front().t) throw DataError("RSS filter input spans several epochs");
  }
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& m : ms) best = std::max(best, m.rss);
  std::vector<Measurement> kept;
  for (const auto& m : ms) {
    if (m.rss >= best - threshold_db) kept.push_back(m);
  }
  return kept;
}

// ---- model file ------------------------------------------------------------
//
//   oori-model 1
//   n_trees <n>
//   n_classes <k>
//   feature_names toa_s,aoa_deg,aod_deg,rss_dbm
//   master_seed <seed>
//   params max_depth=<d> min_leaf_size=<m> bootstrap=<0|1>
//   tree <i> nodes <count>
//   node_id,kind,feature_index,threshold,left,right[,counts...]
//   ...
//   end

inline constexpr int kModelVersion = 1;

inline void write_model(std::ostream& out, const Ensemble& e) {
  out << "oori-model " << kModelVersion << '\n';
  out << "n_trees " << e.trees().size() << '\n';
  out << "n_classes " << e.n_classes() << '\n';
  out << "feature_names ";
  for (std::size_t i = 0; i < e.feature_names().size(); ++i) {
    out << (i ? "," : "") << e.feature_names()[i];
  }
  out << '\n';
  out << "master_seed " << e.master_seed() << '\n';
  out << "params max_depth=" << e.params().tree.max_depth
      << " min_leaf_size=" << e.params().tree.min_leaf_size
      << " bootstrap=" << (e.params().bootstrap ? 1 : 0) << '\n';
  for (std::size_t t = 0; t < e.trees().size(); ++t) {
    const auto& nodes = e.trees()[t].nodes();
    out << "tree " << t << " nodes " << nodes.size() << '\n';
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const auto& n = nodes[i];
      if (n.leaf()) {
        out << i << ",leaf,-1,0,-1,-1";
        for (auto c : n.counts) out << ',' << c;
      } else {
        out << i << ",split," << n.feature << ',' << csv::fmt(n.threshold) << ',' << n.left << ','
            << n.right;
      }
      out << '\n';
    }
  }
  out << "end\n";
}

namespace detail {

class ModelReader {
 public:
  explicit ModelReader(std::istream& in) : in_(in) {}

  std::string line() {
    std::string s;
    if (!std::getline(in_, s)) fail("unexpected end of model file");
    ++lineno_;
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
  }

  /// Reads "<key> <value>" and returns value.
  std::string keyed(std::string_view key) {
    const std::string s = line();
    if (s.rfind(std::string(key) + " ", 0) != 0) fail("expected '" + std::string(key) + "'");
    return s.substr(key.size() + 1);
  }

  template <class Int>
  Int to_int(std::string_view s) {
    Int v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) fail("bad integer '" + std::string(s) + "'");
    return v;
  }

  double to_double(std::string_view s) {
    double v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) fail("bad number '" + std::string(s) + "'");
    return v;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw DataError("model file line " + std::to_string(lineno_) + ": " + what);
  }

 private:
  std::istream& in_;
  int lineno_{0};
};

}  // namespace detail

inline Ensemble read_model(std::istream& in) {
  detail::ModelReader r(in);
  const std::string magic = r.line();
  if (magic != "oori-model " + std::to_string(kModelVersion)) r.fail("not a version-1 model file");
  const auto n_trees = r.to_int<std::size_t>(r.keyed("n_trees"));
  const int n_classes = r.to_int<int>(r.keyed("n_classes"));
  if (n_trees < 1 || n_classes < 1) r.fail("model needs >= 1 tree and >= 1 class");
  const std::string names = r.keyed("feature_names");
  std::string expected;
  for (std::size_t i = 0; i < kFeatureNames.size(); ++i) expected += (i ? "," : "") + kFeatureNames[i];
  if (names != expected) r.fail("unexpected feature names '" + names + "'");
  const auto seed = r.to_int<std::uint64_t>(r.keyed("master_seed"));
  BaggingParams params;
  params.n_trees = static_cast<int>(n_trees);
  {
    std::istringstream ps(r.keyed("params"));
    std::string kv;
    while (ps >> kv) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) r.fail("bad parameter '" + kv + "'");
      const std::string key = kv.substr(0, eq);
      const int v = r.to_int<int>(std::string_view(kv).substr(eq + 1));
      if (key == "max_depth") {
        params.tree.max_depth = v;
      } else if (key == "min_leaf_size") {
        params.tree.min_leaf_size = v;
      } else if (key == "bootstrap") {
        params.bootstrap = v != 0;
      } else {
        r.fail("unknown parameter '" + key + "'");
      }
    }
  }
  std::vector<DecisionTree> trees;
  for (std::size_t t = 0; t < n_trees; ++t) {
    const std::string head = r.line();
    std::istringstream hs(head);
    std::string w1, w3;
    std::size_t idx = 0, count = 0;
    if (!(hs >> w1 >> idx >> w3 >> count) || w1 != "tree" || w3 != "nodes" || idx != t || count == 0) {
      r.fail("bad tree header '" + head + "'");
    }
    std::vector<TreeNode> nodes(count);
    for (std::size_t i = 0; i < count; ++i) {
      const std::string s = r.line();
      const auto f = csv::split(s);
      if (f.size() < 6 || r.to_int<std::size_t>(f[0]) != i) r.fail("bad node record");
      auto& n = nodes[i];
      if (f[1] == "leaf") {
        if (f.size() != 6 + static_cast<std::size_t>(n_classes)) r.fail("leaf count arity mismatch");
        n.counts.resize(n_classes);
        for (int c = 0; c < n_classes; ++c) n.counts[c] = r.to_int<std::uint32_t>(f[6 + c]);
      } else if (f[1] == "split") {
        if (f.size() != 6) r.fail("split record has extra fields");
        n.feature = r.to_int<int>(f[2]);
        n.threshold = r.to_double(f[3]);
        n.left = r.to_int<int>(f[4]);
        n.right = r.to_int<int>(f[5]);
        if (n.feature < 0 || n.feature >= static_cast<int>(kNumFeatures) || n.left <= static_cast<int>(i) ||
            n.right <= static_cast<int>(i) || n.left >= static_cast<int>(count) ||
            n.right >= static_cast<int>(count)) {
          r.fail("split node references out of range");
        }
      } else {
        r.fail("unknown node kind");
      }
    }
    trees.emplace_back(std::move(nodes), n_classes);
  }
  if (r.line() != "end") r.fail("missing 'end'");
  return Ensemble(std::move(trees), n_classes, seed, params);
}

inline std::string serialize(const Ensemble& e) {
  std::ostringstream os;
  write_model(os, e);
  return os.str();
}

inline Ensemble deserialize(const std::string& text) {
  std::istringstream is(text);
  return read_model(is);
}

}  // namespace oori
