#include "drr/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <iostream>

#include "drr/drrnn.hpp"
#include "drr/error.hpp"
#include "drr/parallel.hpp"
#include "drr/textio.hpp"

namespace drr::ensemble {

void ProbMatrix::add(std::string id, const Probs& p) {
  if (index_.contains(id)) throw DataError("duplicate id '" + id + "' in probability matrix");
  index_.emplace(id, ids_.size());
  ids_.push_back(std::move(id));
  rows_.push_back(p);
}

const Probs* ProbMatrix::find(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &rows_[it->second];
}

ProbMatrix parse_prob_matrix(std::string_view text, std::vector<std::string>* warnings) {
  const auto lines = split_lines(text);
  constexpr std::string_view kSystem = "#system=";
  constexpr std::string_view kClasses = "#classes=FACTUAL,OPINION,SOCIALIZING";
  if (lines.size() < 2 || lines[0].substr(0, kSystem.size()) != kSystem)
    throw DataError("probability matrix line 1: expected '#system=<name>'");
  if (lines[1] != kClasses) throw DataError("probability matrix line 2: expected '" + std::string(kClasses) + "'");

  ProbMatrix m;
  m.system_name = std::string(lines[0].substr(kSystem.size()));
  for (std::size_t i = 2; i < lines.size(); ++i) {
    const auto line = lines[i];
    if (line.empty()) continue;
    const std::string where = "probability matrix line " + std::to_string(i + 1);
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0) throw DataError(where + ": expected id<TAB>p0 p1 p2");
    const std::string id(line.substr(0, tab));
    const auto fields = split_fields(line.substr(tab + 1));
    if (fields.size() != kNumClasses)
      throw DataError(where + ": expected 3 probabilities, found " + std::to_string(fields.size()));
    Probs p;
    double sum = 0.0;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      if (!parse_float(fields[c], p[c])) throw DataError(where + ": non-numeric value '" + std::string(fields[c]) + "'");
      if (p[c] < 0.0) throw DataError(where + ": negative probability");
      sum += p[c];
    }
    const double off = std::abs(sum - 1.0);
    if (off > 1e-4) throw DataError(where + " (id '" + id + "'): row sums to " + std::to_string(sum));
    if (off > 1e-6) {
      for (auto& v : p) v /= sum;
      const std::string msg = where + " (id '" + id + "'): renormalized row summing to " + std::to_string(sum);
      if (warnings) warnings->push_back(msg);
      else std::cerr << "warning: " << msg << '\n';
    }
    m.add(id, p);
  }
  return m;
}

ProbMatrix load_prob_matrix(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  return parse_prob_matrix(read_file(path), warnings);
}

std::string format_prob_matrix(const ProbMatrix& m) {
  std::string out = "#system=" + m.system_name + "\n#classes=FACTUAL,OPINION,SOCIALIZING\n";
  for (std::size_t i = 0; i < m.size(); ++i) {
    out += m.ids()[i];
    out += '\t';
    const auto& p = m.rows()[i];
    out += format_float(p[0]) + ' ' + format_float(p[1]) + ' ' + format_float(p[2]) + '\n';
  }
  return out;
}

void save_prob_matrix(const ProbMatrix& m, const std::filesystem::path& path) {
  write_file(path, format_prob_matrix(m));
}

MetaFeatures build_meta_features(std::span<const ProbMatrix> bases, std::span<const std::string> ids) {
  if (bases.empty()) throw ConfigError("stacking needs at least one base system");
  MetaFeatures mf;
  mf.ids.assign(ids.begin(), ids.end());
  mf.n_systems = bases.size();
  mf.values = Matrix::Zero(static_cast<Eigen::Index>(ids.size()), static_cast<Eigen::Index>(3 * bases.size()));
  std::string missing;
  std::size_t n_missing = 0;
  for (std::size_t s = 0; s < bases.size(); ++s) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const Probs* p = bases[s].find(ids[i]);
      if (!p) {
        if (++n_missing <= 20) missing += (missing.empty() ? "" : ", ") + bases[s].system_name + ":" + ids[i];
        continue;
      }
      for (std::size_t c = 0; c < kNumClasses; ++c)
        mf.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(3 * s + c)) = (*p)[c];
    }
  }
  if (n_missing > 0) {
    throw DataError("base systems are not aligned; " + std::to_string(n_missing) + " missing ids: " + missing +
                    (n_missing > 20 ? ", ..." : ""));
  }
  return mf;
}

ProbMatrix oof_probs(const ProbTrainer& trainer, std::span<const std::string> ids, std::span<const Label> labels,
                     int k, std::uint64_t seed, std::string system_name) {
  if (ids.size() != labels.size()) throw ShapeError("ids and labels disagree in count");
  const auto folds = drrnn::stratified_folds(labels, k, seed);
  std::vector<Probs> rows(ids.size());
  for (int f = 0; f < k; ++f) {
    std::vector<std::size_t> train, held;
    for (std::size_t i = 0; i < folds.size(); ++i) (folds[i] == f ? held : train).push_back(i);
    const auto pred = trainer(train, held);
    if (pred.size() != held.size()) throw ShapeError("trainer returned the wrong number of rows");
    for (std::size_t j = 0; j < held.size(); ++j) rows[held[j]] = pred[j];
  }
  ProbMatrix m;
  m.system_name = std::move(system_name);
  for (std::size_t i = 0; i < ids.size(); ++i) m.add(ids[i], rows[i]);
  return m;
}

namespace {

void check_labels(std::span<const std::string> ids, std::span<const Label> labels) {
  if (ids.size() != labels.size()) throw ShapeError("ids and labels disagree in count");
  if (ids.empty()) throw DataError("stacker needs at least one training row");
}

std::vector<Label> column(std::span<const Label> y, std::span<const std::size_t> rows) {
  std::vector<Label> out;
  for (auto r : rows) out.push_back(y[r]);
  return out;
}

}  // namespace

std::vector<Label> StackerC1::predict(std::span<const ProbMatrix> bases, std::span<const std::string> ids) const {
  if (bases.size() != n_systems) throw ConfigError("stacker was trained on " + std::to_string(n_systems) + " systems");
  const auto mf = build_meta_features(bases, ids);
  std::vector<Label> out;
  for (const auto& row : baselines::to_sparse(mf.values)) out.push_back(svm.predict(row));
  return out;
}

StackerC1 stack_train_c1(std::span<const ProbMatrix> bases, std::span<const std::string> ids,
                         std::span<const Label> labels, const baselines::SvmOptions& svm) {
  check_labels(ids, labels);
  const auto mf = build_meta_features(bases, ids);
  StackerC1 s;
  s.n_systems = bases.size();
  s.svm = baselines::svm_train(baselines::to_sparse(mf.values), labels, svm);
  return s;
}

Label VotingEstimator::predict(std::span<const double> row) const {
  baselines::SparseVector sv;
  sv.dim = row.size();
  for (std::size_t j = 0; j < row.size(); ++j)
    if (row[j] != 0.0) sv.entries.emplace_back(static_cast<std::uint32_t>(j), row[j]);
  const Label a = logreg.predict(sv);
  const Label b = forest.predict(row);
  const Label c = svm.predict(sv);
  if (b == c) return b;
  return a;  // a agrees with b or c, or all three differ
}

std::vector<Label> StackerC2::predict(std::span<const ProbMatrix> bases, std::span<const std::string> ids) const {
  if (bases.size() != n_systems) throw ConfigError("stacker was trained on " + std::to_string(n_systems) + " systems");
  const auto mf = build_meta_features(bases, ids);
  std::vector<Label> out;
  out.reserve(ids.size());
  for (Eigen::Index i = 0; i < mf.values.rows(); ++i) {
    std::span<const double> row(mf.values.row(i).data(), static_cast<std::size_t>(mf.values.cols()));
    std::array<int, kNumClasses> votes{};
    for (const auto& bag : bags) ++votes[static_cast<std::size_t>(index_of(bag.predict(row)))];
    std::size_t best = 0;
    for (std::size_t c = 1; c < kNumClasses; ++c)
      if (votes[c] > votes[best]) best = c;
    out.push_back(label_from_index(static_cast<int>(best)));
  }
  return out;
}

StackerC2 stack_train_c2(std::span<const ProbMatrix> bases, std::span<const std::string> ids,
                         std::span<const Label> labels, const C2Options& opt) {
  check_labels(ids, labels);
  if (opt.n_bags < 1) throw ConfigError("Contrastive-2 needs at least one bag");
  const auto mf = build_meta_features(bases, ids);
  const auto all_sparse = baselines::to_sparse(mf.values);
  StackerC2 s;
  s.n_systems = bases.size();
  s.bags.resize(static_cast<std::size_t>(opt.n_bags));
  const RngStream root(opt.seed);
  parallel_for(s.bags.size(), opt.jobs, [&](std::size_t b) {
    auto rng = root.derive({static_cast<std::uint64_t>(b)});
    std::vector<std::size_t> rows(ids.size());
    if (opt.bootstrap) {
      // Redraw the (rare) bootstrap that leaves only one class.
      for (int attempt = 0;; ++attempt) {
        for (auto& r : rows) r = static_cast<std::size_t>(rng.below(ids.size()));
        const Label first = labels[rows.front()];
        const bool mixed = std::any_of(rows.begin(), rows.end(), [&](std::size_t r) { return labels[r] != first; });
        if (mixed || attempt >= 100) break;
      }
    } else {
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    const Matrix x = drrnn::gather_rows(mf.values, rows);
    std::vector<baselines::SparseVector> xs;
    for (auto r : rows) xs.push_back(all_sparse[r]);
    const auto y = column(labels, rows);
    auto& est = s.bags[b];
    est.logreg = baselines::logreg_train(xs, y, opt.logreg);
    auto svm_opt = opt.svm;
    svm_opt.seed = rng.next_u64();
    est.svm = baselines::svm_train(xs, y, svm_opt);
    est.forest = baselines::rf_train(x, y, {opt.forest_trees, true, 0, rng.next_u64(), 1});
  });
  return s;
}

}  // namespace drr::ensemble
