#include <algorithm>

#include "drr/baselines.hpp"
#include "drr/error.hpp"

namespace drr::baselines {

Container to_container(const LinearModel& m) {
  Container c;
  c.kind = "linear";
  c.set_string("linear.kind", m.kind == LinearKind::SvmHinge ? "svm-hinge" : "logistic");
  c.add_array("weights", {static_cast<std::uint64_t>(m.weights.rows()), static_cast<std::uint64_t>(m.weights.cols())},
              std::vector<double>(m.weights.data(), m.weights.data() + m.weights.size()));
  c.add_array("intercept", {kNumClasses}, std::vector<double>(m.intercept.begin(), m.intercept.end()));
  return c;
}

LinearModel linear_from_container(const Container& c) {
  LinearModel m;
  const auto& kind = c.string("linear.kind");
  if (kind == "svm-hinge") m.kind = LinearKind::SvmHinge;
  else if (kind == "logistic") m.kind = LinearKind::Logistic;
  else throw DataError("unknown linear model kind '" + kind + "'");
  const auto& w = c.array("weights");
  if (w.shape.size() != 2 || w.shape[0] != kNumClasses) throw ShapeError("linear weights must be 3 x dim");
  m.weights = Matrix::Zero(static_cast<Eigen::Index>(w.shape[0]), static_cast<Eigen::Index>(w.shape[1]));
  std::copy(w.data.begin(), w.data.end(), m.weights.data());
  const auto& b = c.array("intercept");
  if (b.shape != std::vector<std::uint64_t>{kNumClasses}) throw ShapeError("linear intercept must have 3 entries");
  std::copy(b.data.begin(), b.data.end(), m.intercept.begin());
  return m;
}

Container to_container(const Forest& f) {
  Container c;
  c.kind = "forest";
  c.set_scalar("forest.max_features", f.max_features);
  c.set_scalar("forest.n_trees", static_cast<double>(f.trees.size()));
  for (std::size_t t = 0; t < f.trees.size(); ++t) {
    std::vector<double> flat;
    for (const auto& n : f.trees[t].nodes) {
      flat.insert(flat.end(), {static_cast<double>(n.feature), n.threshold, static_cast<double>(n.left),
                               static_cast<double>(n.right), n.counts[0], n.counts[1], n.counts[2]});
    }
    c.add_array("tree" + std::to_string(t), {f.trees[t].nodes.size(), 7}, std::move(flat));
  }
  return c;
}

Forest forest_from_container(const Container& c) {
  Forest f;
  f.max_features = static_cast<int>(c.scalar("forest.max_features"));
  const auto n_trees = static_cast<std::size_t>(c.scalar("forest.n_trees"));
  for (std::size_t t = 0; t < n_trees; ++t) {
    const auto& a = c.array("tree" + std::to_string(t));
    if (a.shape.size() != 2 || a.shape[1] != 7 || a.shape[0] == 0) throw ShapeError("tree table must be n x 7");
    DecisionTree tree;
    const auto n_nodes = static_cast<int>(a.shape[0]);
    for (int i = 0; i < n_nodes; ++i) {
      const double* r = a.data.data() + 7 * static_cast<std::size_t>(i);
      TreeNode n{static_cast<int>(r[0]), r[1], static_cast<int>(r[2]), static_cast<int>(r[3]), {r[4], r[5], r[6]}};
      if (n.feature >= 0 && (n.left <= i || n.right <= i || n.left >= n_nodes || n.right >= n_nodes))
        throw ShapeError("tree " + std::to_string(t) + " has an invalid child link");
      tree.nodes.push_back(n);
    }
    f.trees.push_back(std::move(tree));
  }
  return f;
}

void add_tfidf(Container& c, const TfidfModel& m) {
  std::string vocab;
  std::vector<std::pair<std::uint32_t, const std::string*>> by_index;
  for (const auto& [gram, idx] : m.vocabulary) by_index.emplace_back(idx, &gram);
  std::sort(by_index.begin(), by_index.end());
  for (const auto& [idx, gram] : by_index) {
    vocab += *gram;
    vocab += '\0';
  }
  c.set_string("tfidf.vocabulary", vocab);
  c.set_scalar("tfidf.n_min", m.n_min);
  c.set_scalar("tfidf.n_max", m.n_max);
  c.add_array("tfidf.idf", {m.idf.size()}, m.idf);
}

TfidfModel tfidf_from_container(const Container& c) {
  TfidfModel m;
  m.n_min = static_cast<int>(c.scalar("tfidf.n_min"));
  m.n_max = static_cast<int>(c.scalar("tfidf.n_max"));
  m.idf = c.array("tfidf.idf").data;
  const auto& vocab = c.string("tfidf.vocabulary");
  std::size_t start = 0;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    if (vocab[i] != '\0') continue;
    m.vocabulary.emplace(vocab.substr(start, i - start), static_cast<std::uint32_t>(m.vocabulary.size()));
    start = i + 1;
  }
  if (m.vocabulary.size() != m.idf.size()) throw ShapeError("tfidf vocabulary and idf lengths differ");
  return m;
}

}  // namespace drr::baselines
