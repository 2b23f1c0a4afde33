#include <algorithm>
#include <cmath>
#include <numeric>

#include "drr/baselines.hpp"
#include "drr/error.hpp"
#include "drr/parallel.hpp"

namespace drr::baselines {

namespace {

double gini(const Probs& counts, double total) {
  if (total <= 0.0) return 0.0;
  double s = 1.0;
  for (double c : counts) s -= (c / total) * (c / total);
  return s;
}

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;  // weighted child impurity
};

// Best threshold on one feature, or feature=-1 if the feature is constant.
Split best_split_on(const Matrix& x, std::span<const Label> y, std::vector<std::size_t>& rows, int f) {
  std::sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
    const double va = x(static_cast<Eigen::Index>(a), f), vb = x(static_cast<Eigen::Index>(b), f);
    return va < vb || (va == vb && a < b);
  });
  Probs right{}, left{};
  for (auto r : rows) right[static_cast<std::size_t>(index_of(y[r]))] += 1.0;
  const double n = static_cast<double>(rows.size());
  Split best;
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const auto cls = static_cast<std::size_t>(index_of(y[rows[i]]));
    left[cls] += 1.0;
    right[cls] -= 1.0;
    const double a = x(static_cast<Eigen::Index>(rows[i]), f);
    const double b = x(static_cast<Eigen::Index>(rows[i + 1]), f);
    if (a == b) continue;
    const double nl = static_cast<double>(i + 1), nr = n - nl;
    const double imp = (nl * gini(left, nl) + nr * gini(right, nr)) / n;
    if (best.feature < 0 || imp < best.impurity) {
      best.feature = f;
      best.impurity = imp;
      best.threshold = a + (b - a) / 2.0;
      if (!(best.threshold > a && best.threshold < b)) best.threshold = a;
    }
  }
  return best;
}

class TreeGrower {
 public:
  TreeGrower(const Matrix& x, std::span<const Label> y, int max_features, RngStream& rng)
      : x_(x), y_(y), max_features_(max_features), rng_(rng) {}

  DecisionTree grow(std::span<const std::size_t> rows) {
    DecisionTree tree;
    std::vector<std::size_t> root(rows.begin(), rows.end());
    build(tree, root);
    return tree;
  }

 private:
  int build(DecisionTree& tree, std::vector<std::size_t>& rows) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    Probs counts{};
    for (auto r : rows) counts[static_cast<std::size_t>(index_of(y_[r]))] += 1.0;
    tree.nodes[static_cast<std::size_t>(id)].counts = counts;
    const int classes_present = static_cast<int>(std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0; }));
    if (rows.size() < 2 || classes_present <= 1) return id;

    // Features are tried in a random order; the first max_features that are
    // non-constant on this node compete, further ones only if all were constant.
    std::vector<int> features(static_cast<std::size_t>(x_.cols()));
    std::iota(features.begin(), features.end(), 0);
    rng_.shuffle(features);
    Split best;
    int usable = 0;
    for (int f : features) {
      if (usable >= max_features_) break;
      const Split s = best_split_on(x_, y_, rows, f);
      if (s.feature < 0) continue;
      ++usable;
      if (best.feature < 0 || s.impurity < best.impurity) best = s;
    }
    if (best.feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (auto r : rows) (x_(static_cast<Eigen::Index>(r), best.feature) <= best.threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    const int l = build(tree, left);
    const int r = build(tree, right);
    auto& node = tree.nodes[static_cast<std::size_t>(id)];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  const Matrix& x_;
  std::span<const Label> y_;
  int max_features_;
  RngStream& rng_;
};

}  // namespace

Probs DecisionTree::predict_proba(std::span<const double> x) const {
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  Probs p = nodes[i].counts;
  const double total = p[0] + p[1] + p[2];
  for (auto& v : p) v /= total;
  return p;
}

DecisionTree grow_tree(const Matrix& x, std::span<const Label> y, std::span<const std::size_t> rows,
                       int max_features, RngStream& rng) {
  if (rows.empty()) throw DataError("cannot grow a tree on zero samples");
  return TreeGrower(x, y, std::max(1, max_features), rng).grow(rows);
}

Probs Forest::predict_proba(std::span<const double> x) const {
  Probs p{};
  for (const auto& t : trees) {
    const auto tp = t.predict_proba(x);
    for (std::size_t c = 0; c < kNumClasses; ++c) p[c] += tp[c];
  }
  for (auto& v : p) v /= static_cast<double>(trees.size());
  return p;
}

Label Forest::predict(std::span<const double> x) const { return label_from_index(nn::argmax(predict_proba(x))); }

Forest rf_train(const Matrix& x, std::span<const Label> y, const ForestOptions& opt) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) throw ShapeError("feature rows and labels disagree in count");
  if (y.empty()) throw DataError("random forest needs a non-empty training set");
  if (opt.n_trees < 1) throw ConfigError("random forest needs at least one tree");
  Forest forest;
  forest.max_features = opt.max_features > 0
                            ? opt.max_features
                            : std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(x.cols())))));
  forest.trees.resize(static_cast<std::size_t>(opt.n_trees));
  const RngStream root(opt.seed);
  parallel_for(forest.trees.size(), opt.jobs, [&](std::size_t t) {
    auto rng = root.derive({static_cast<std::uint64_t>(t)});
    std::vector<std::size_t> rows(y.size());
    if (opt.bootstrap) {
      for (auto& r : rows) r = static_cast<std::size_t>(rng.below(y.size()));
    } else {
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    forest.trees[t] = grow_tree(x, y, rows, forest.max_features, rng);
  });
  return forest;
}

}  // namespace drr::baselines
