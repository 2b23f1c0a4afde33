#include "drr/eval.hpp"

#include <cstdio>
#include <map>

#include <json.hpp>

#include "drr/error.hpp"

namespace drr::eval {

std::int64_t ConfusionMatrix::total() const noexcept {
  std::int64_t t = 0;
  for (const auto& row : counts)
    for (auto c : row) t += c;
  return t;
}

ConfusionMatrix confusion(std::span<const Label> gold, std::span<const Label> pred) {
  if (gold.size() != pred.size()) {
    throw DataError("gold and predicted label lists differ in length (" + std::to_string(gold.size()) + " vs " +
                    std::to_string(pred.size()) + ")");
  }
  if (gold.empty()) throw DataError("cannot evaluate an empty label list");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < gold.size(); ++i) ++cm.counts[static_cast<std::size_t>(index_of(gold[i]))][static_cast<std::size_t>(index_of(pred[i]))];
  return cm;
}

MetricsReport metrics(const ConfusionMatrix& cm) {
  const auto total = cm.total();
  if (total <= 0) throw DataError("confusion matrix is empty");
  MetricsReport r;
  r.confusion = cm;
  std::int64_t trace = 0;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const auto tp = cm.counts[c][c];
    trace += tp;
    std::int64_t row = 0, col = 0;
    for (std::size_t k = 0; k < kNumClasses; ++k) {
      row += cm.counts[c][k];
      col += cm.counts[k][c];
    }
    auto& s = r.per_class[c];
    s.recall = row > 0 ? static_cast<double>(tp) / static_cast<double>(row) : 0.0;
    s.precision = col > 0 ? static_cast<double>(tp) / static_cast<double>(col) : 0.0;
    s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    r.macro_f1 += s.f1 / static_cast<double>(kNumClasses);
    r.avg_rec += s.recall / static_cast<double>(kNumClasses);
  }
  r.accuracy = static_cast<double>(trace) / static_cast<double>(total);
  return r;
}

MetricsReport evaluate(std::span<const Label> gold, std::span<const Label> pred, std::span<const std::string> categories) {
  MetricsReport r = metrics(confusion(gold, pred));
  if (categories.empty()) return r;
  if (categories.size() != gold.size()) throw DataError("category list length differs from label list");
  std::map<std::string, std::pair<std::vector<Label>, std::vector<Label>>> groups;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    auto& g = groups[categories[i]];
    g.first.push_back(gold[i]);
    g.second.push_back(pred[i]);
  }
  for (const auto& [cat, g] : groups) r.per_category.emplace_back(cat, metrics(confusion(g.first, g.second)));
  return r;
}

namespace {

void append_block(std::string& out, const MetricsReport& r, const std::string& title) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s (n=%lld)\n", title.c_str(), static_cast<long long>(r.confusion.total()));
  out += buf;
  std::snprintf(buf, sizeof buf, "  Accuracy %.4f   F1 %.4f   AvgRec %.4f\n", r.accuracy, r.macro_f1, r.avg_rec);
  out += buf;
  out += "  gold \\ pred     FACTUAL    OPINION SOCIALIZING   prec    rec     f1\n";
  for (std::size_t g = 0; g < kNumClasses; ++g) {
    const auto& c = r.confusion.counts[g];
    const auto& s = r.per_class[g];
    std::snprintf(buf, sizeof buf, "  %-12s %10lld %10lld %11lld %6.3f %6.3f %6.3f\n",
                  std::string(label_name(static_cast<Label>(g))).c_str(), static_cast<long long>(c[0]),
                  static_cast<long long>(c[1]), static_cast<long long>(c[2]), s.precision, s.recall, s.f1);
    out += buf;
  }
}

nlohmann::ordered_json to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["accuracy"] = r.accuracy;
  j["macro_f1"] = r.macro_f1;
  j["avg_rec"] = r.avg_rec;
  j["n"] = r.confusion.total();
  j["confusion"] = r.confusion.counts;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const auto& s = r.per_class[c];
    j["per_class"][std::string(label_name(static_cast<Label>(c)))] = {
        {"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
  }
  if (!r.per_category.empty()) {
    j["per_category"] = nlohmann::ordered_json::object();
    for (const auto& [cat, sub] : r.per_category) j["per_category"][cat] = to_json(sub);
  }
  return j;
}

}  // namespace

std::string format_report(const MetricsReport& r) {
  std::string out;
  append_block(out, r, "overall");
  for (const auto& [cat, sub] : r.per_category) {
    out += '\n';
    append_block(out, sub, "category '" + cat + "'");
  }
  return out;
}

std::string report_to_json(const MetricsReport& r) { return to_json(r).dump(2) + "\n"; }

}  // namespace drr::eval
