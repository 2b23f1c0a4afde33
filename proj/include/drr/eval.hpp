#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "drr/corpus.hpp"

namespace drr::eval {

/// counts[gold][predicted].
struct ConfusionMatrix {
  std::array<std::array<std::int64_t, kNumClasses>, kNumClasses> counts{};

  std::int64_t total() const noexcept;
  bool operator==(const ConfusionMatrix&) const = default;
};

/// Throws DataError on a length mismatch or empty input.
ConfusionMatrix confusion(std::span<const Label> gold, std::span<const Label> pred);

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MetricsReport {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double avg_rec = 0.0;
  ConfusionMatrix confusion;
  std::array<ClassScores, kNumClasses> per_class{};
  std::vector<std::pair<std::string, MetricsReport>> per_category;
};

/// Accuracy, macro-F1 and AvgRec (macro recall). Empty rows or columns give
/// zero recall or precision. Throws DataError when the matrix is empty.
MetricsReport metrics(const ConfusionMatrix& cm);

/// metrics() over all rows, plus one sub-report per category when
/// `categories` is non-empty (sorted by category name).
MetricsReport evaluate(std::span<const Label> gold, std::span<const Label> pred,
                       std::span<const std::string> categories = {});

std::string format_report(const MetricsReport& r);
std::string report_to_json(const MetricsReport& r);

}  // namespace drr::eval
