#include "drr/corpus.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "drr/error.hpp"
#include "drr/textio.hpp"

namespace drr {

Label label_from_index(int i) {
  if (i < 0 || i >= static_cast<int>(kNumClasses))
    throw DataError("label index out of range: " + std::to_string(i));
  return static_cast<Label>(i);
}

std::string_view label_name(Label l) noexcept {
  switch (l) {
    case Label::Factual: return "FACTUAL";
    case Label::Opinion: return "OPINION";
    case Label::Socializing: return "SOCIALIZING";
  }
  return "?";
}

std::optional<Label> parse_label(std::string_view s) noexcept {
  for (Label l : kAllLabels)
    if (label_name(l) == s) return l;
  return std::nullopt;
}

std::vector<Label> Dataset::labels() const {
  std::vector<Label> out;
  out.reserve(questions.size());
  for (const auto& q : questions) {
    if (!q.label) throw DataError("question '" + q.id + "' in " + name + " has no label");
    out.push_back(*q.label);
  }
  return out;
}

std::vector<std::string> Dataset::ids() const {
  std::vector<std::string> out;
  out.reserve(questions.size());
  for (const auto& q : questions) out.push_back(q.id);
  return out;
}

std::string concat_text(const Question& q) {
  if (q.subject.empty()) return q.body;
  if (q.body.empty()) return q.subject;
  return q.subject + ' ' + q.body;
}

namespace {

std::string field(const nlohmann::json& obj, const char* key, std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw DataError("line " + std::to_string(line_no) + ": missing field '" + key + "'");
  if (!it->is_string())
    throw DataError("line " + std::to_string(line_no) + ": field '" + key + "' is not a string");
  return it->get<std::string>();
}

}  // namespace

Dataset parse_questions(std::string_view text, std::string name) {
  Dataset ds;
  ds.name = std::move(name);
  std::unordered_set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      throw DataError("line " + std::to_string(line_no) + ": malformed record");
    }
    if (!obj.is_object()) throw DataError("line " + std::to_string(line_no) + ": record is not an object");

    Question q;
    q.id = field(obj, "id", line_no);
    q.subject = field(obj, "subject", line_no);
    q.body = field(obj, "body", line_no);
    q.category = field(obj, "category", line_no);
    if (auto it = obj.find("label"); it != obj.end() && !it->is_null()) {
      if (!it->is_string()) throw DataError("line " + std::to_string(line_no) + ": label is not a string");
      auto l = parse_label(it->get<std::string>());
      if (!l) {
        throw DataError("line " + std::to_string(line_no) + ": unknown label '" +
                        it->get<std::string>() + "'");
      }
      q.label = *l;
    }
    if (q.id.empty()) throw DataError("line " + std::to_string(line_no) + ": empty id");
    if (q.subject.empty() && q.body.empty())
      throw DataError("line " + std::to_string(line_no) + ": subject and body are both empty");
    if (!seen.insert(q.id).second)
      throw DataError("line " + std::to_string(line_no) + ": duplicate id '" + q.id + "'");
    ds.questions.push_back(std::move(q));
  }
  return ds;
}

Dataset load_questions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open question file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_questions(ss.str(), path.filename().string());
}

void save_questions(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  for (const auto& q : ds.questions) {
    nlohmann::ordered_json obj;
    obj["id"] = q.id;
    obj["subject"] = q.subject;
    obj["body"] = q.body;
    obj["category"] = q.category;
    if (q.label) obj["label"] = std::string(label_name(*q.label));
    out << obj.dump() << '\n';
  }
}

LabelFile parse_label_file(std::string_view text) {
  LabelFile out;
  std::unordered_set<std::string> seen;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = lines[i];
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0)
      throw DataError("label file line " + std::to_string(i + 1) + ": expected id<TAB>LABEL");
    auto label = parse_label(line.substr(tab + 1));
    if (!label) throw DataError("label file line " + std::to_string(i + 1) + ": unknown label");
    std::string id(line.substr(0, tab));
    if (!seen.insert(id).second) throw DataError("label file line " + std::to_string(i + 1) + ": duplicate id '" + id + "'");
    out.emplace_back(std::move(id), *label);
  }
  return out;
}

LabelFile load_label_file(const std::filesystem::path& path) { return parse_label_file(read_file(path)); }

std::string format_label_file(const LabelFile& labels) {
  std::string out;
  for (const auto& [id, l] : labels) {
    out += id;
    out += '\t';
    out += label_name(l);
    out += '\n';
  }
  return out;
}

void save_label_file(const LabelFile& labels, const std::filesystem::path& path) {
  write_file(path, format_label_file(labels));
}

}  // namespace drr
