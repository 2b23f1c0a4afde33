#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace drr {

enum class Label : int { Factual = 0, Opinion = 1, Socializing = 2 };

inline constexpr std::size_t kNumClasses = 3;
inline constexpr std::array<Label, kNumClasses> kAllLabels = {Label::Factual, Label::Opinion,
                                                              Label::Socializing};

constexpr int index_of(Label l) noexcept { return static_cast<int>(l); }
Label label_from_index(int i);

/// "FACTUAL", "OPINION" or "SOCIALIZING".
std::string_view label_name(Label l) noexcept;
/// Exact uppercase name; nullopt for anything else.
std::optional<Label> parse_label(std::string_view s) noexcept;

struct Question {
  std::string id;
  std::string subject;
  std::string body;
  std::string category;
  std::optional<Label> label;
};

struct Dataset {
  std::string name;
  std::vector<Question> questions;

  std::size_t size() const noexcept { return questions.size(); }
  bool empty() const noexcept { return questions.empty(); }

  /// Labels in dataset order; throws DataError if any question is unlabeled.
  std::vector<Label> labels() const;
  std::vector<std::string> ids() const;
};

/// Subject and body joined by one space; an empty side is dropped.
std::string concat_text(const Question& q);

/// Reads one JSON object per line with keys id, subject, body, category and
/// optional label. Blank lines are skipped.
Dataset load_questions(const std::filesystem::path& path);
Dataset parse_questions(std::string_view text, std::string name = "inline");

void save_questions(const Dataset& ds, const std::filesystem::path& path);

/// Predicted labels, `id<TAB>LABEL` per line.
using LabelFile = std::vector<std::pair<std::string, Label>>;

LabelFile parse_label_file(std::string_view text);
LabelFile load_label_file(const std::filesystem::path& path);
std::string format_label_file(const LabelFile& labels);
void save_label_file(const LabelFile& labels, const std::filesystem::path& path);

}  // namespace drr
