#include "drr/preprocess.hpp"

#include <fstream>
#include <regex>
#include <sstream>

#include "drr/error.hpp"

namespace drr::preprocess {

namespace {

// A piece of the text being normalized. `inserted` pieces came from a
// replacement and are frozen for the rest of the pass.
struct Segment {
  std::string text;
  bool inserted = false;
};
using Segments = std::vector<Segment>;

bool is_ascii_upper(unsigned char c) { return c >= 'A' && c <= 'Z'; }
bool is_ascii_lower(unsigned char c) { return c >= 'a' && c <= 'z'; }
bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
// Bytes >= 0x80 belong to multi-byte UTF-8 letters; treat them as word bytes.
bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || is_ascii_upper(c) || is_ascii_lower(c) || c == '_' || c >= 0x80;
}
char ascii_lower(char c) { return is_ascii_upper(static_cast<unsigned char>(c)) ? static_cast<char>(c + 32) : c; }

bool is_emoji(char32_t cp) {
  return (cp >= 0x1F000 && cp <= 0x1FAFF) || (cp >= 0x2600 && cp <= 0x27BF) ||
         (cp >= 0x2300 && cp <= 0x23FF) || (cp >= 0x2B00 && cp <= 0x2BFF) ||
         (cp >= 0xE0020 && cp <= 0xE007F) || cp == 0xFE0F || cp == 0xFE0E || cp == 0x200D ||
         cp == 0x20E3 || cp == 0x3030 || cp == 0x303D || cp == 0x3297 || cp == 0x3299;
}

// Decodes one UTF-8 sequence at s[i]; returns its length, or 1 with cp=~0 for
// an invalid byte (which is then copied through untouched).
std::size_t decode_utf8(std::string_view s, std::size_t i, char32_t& cp) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  std::size_t len = b0 < 0x80 ? 1 : (b0 >> 5) == 0x6 ? 2 : (b0 >> 4) == 0xE ? 3 : (b0 >> 3) == 0x1E ? 4 : 0;
  if (len == 0 || i + len > s.size()) {
    cp = 0xFFFFFFFF;
    return 1;
  }
  cp = len == 1 ? b0 : len == 2 ? (b0 & 0x1F) : len == 3 ? (b0 & 0x0F) : (b0 & 0x07);
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b >> 6) != 0x2) {
      cp = 0xFFFFFFFF;
      return 1;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  return len;
}

std::string strip_emoji(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    char32_t cp;
    std::size_t len = decode_utf8(s, i, cp);
    if (!is_emoji(cp)) {
      out.append(s.substr(i, len));
      i += len;
      continue;
    }
    while (i < s.size()) {
      len = decode_utf8(s, i, cp);
      if (!is_emoji(cp)) break;
      i += len;
    }
    // Collapse the whitespace that surrounded the removed run.
    const bool left_gap = out.empty() || is_space(static_cast<unsigned char>(out.back()));
    if (i == s.size()) {
      while (!out.empty() && is_space(static_cast<unsigned char>(out.back()))) out.pop_back();
    } else if (left_gap) {
      while (i < s.size() && is_space(static_cast<unsigned char>(s[i]))) ++i;
    }
  }
  return out;
}

void apply_regex(Segments& segs, const std::regex& re, const std::string& replacement) {
  Segments out;
  for (auto& seg : segs) {
    if (seg.inserted) {
      out.push_back(std::move(seg));
      continue;
    }
    const std::string& t = seg.text;
    std::size_t last = 0;
    for (auto it = std::sregex_iterator(t.begin(), t.end(), re); it != std::sregex_iterator(); ++it) {
      const auto pos = static_cast<std::size_t>(it->position());
      const auto len = static_cast<std::size_t>(it->length());
      if (len == 0) continue;
      if (pos > last) out.push_back({t.substr(last, pos - last), false});
      out.push_back({replacement, true});
      last = pos + len;
    }
    if (last < t.size()) out.push_back({t.substr(last), false});
  }
  segs = std::move(out);
}

bool iequals_at(std::string_view text, std::size_t pos, std::string_view key) {
  if (pos + key.size() > text.size()) return false;
  for (std::size_t k = 0; k < key.size(); ++k)
    if (ascii_lower(text[pos + k]) != ascii_lower(key[k])) return false;
  return true;
}

void apply_jargon(Segments& segs, const JargonDict& dict) {
  Segments out;
  for (auto& seg : segs) {
    if (seg.inserted) {
      out.push_back(std::move(seg));
      continue;
    }
    const std::string& t = seg.text;
    std::size_t last = 0;
    std::size_t i = 0;
    while (i < t.size()) {
      const bool at_boundary = i == 0 || !is_word_byte(static_cast<unsigned char>(t[i - 1]));
      const std::pair<std::string, std::string>* hit = nullptr;
      if (at_boundary) {
        for (const auto& entry : dict) {
          const auto& key = entry.first;
          const auto end = i + key.size();
          if (iequals_at(t, i, key) && (end == t.size() || !is_word_byte(static_cast<unsigned char>(t[end])))) {
            hit = &entry;
            break;
          }
        }
      }
      if (!hit) {
        ++i;
        continue;
      }
      if (i > last) out.push_back({t.substr(last, i - last), false});
      out.push_back({hit->second, true});
      i += hit->first.size();
      last = i;
    }
    if (last < t.size()) out.push_back({t.substr(last), false});
  }
  segs = std::move(out);
}

const std::regex& url_re() {
  static const std::regex re(R"((?:https?://|www\.)[^\s]+)", std::regex::ECMAScript | std::regex::icase);
  return re;
}
const std::regex& date_re() {
  static const std::regex re(R"(\b\d{1,4}([/.\-])\d{1,2}\1\d{1,4}\b)");
  return re;
}
const std::regex& hour_re() {
  static const std::regex re(R"(\b\d{1,2}:\d{2}(?::\d{2})?(?:\s?[AaPp][Mm])?\b)");
  return re;
}
const std::regex& ordinal_re() {
  static const std::regex re(R"(\b\d+(?:st|nd|rd|th)\b)", std::regex::ECMAScript | std::regex::icase);
  return re;
}
const std::regex& number_re() {
  static const std::regex re(R"(\b\d+(?:[.,]\d+)*\b)");
  return re;
}

}  // namespace

RuleConfig RuleConfig::all_enabled() {
  RuleConfig c;
  c.strip_emoji = c.replace_urls = c.replace_datetimes = c.replace_ordinals = c.replace_numbers =
      c.lowercase_if_shouty = true;
  c.jargon_dict = builtin_jargon();
  return c;
}

bool is_shouty(std::string_view text) noexcept {
  std::size_t upper = 0, lower = 0;
  for (unsigned char c : text) {
    upper += is_ascii_upper(c);
    lower += is_ascii_lower(c);
  }
  return upper > lower;
}

std::string normalize(std::string_view text, const RuleConfig& cfg) {
  Segments segs{{cfg.strip_emoji ? strip_emoji(text) : std::string(text), false}};
  if (cfg.replace_urls) apply_regex(segs, url_re(), "url link");
  if (cfg.replace_datetimes) {
    apply_regex(segs, date_re(), "date");
    apply_regex(segs, hour_re(), "hour");
  }
  if (cfg.replace_ordinals) apply_regex(segs, ordinal_re(), "nth");
  if (cfg.replace_numbers) apply_regex(segs, number_re(), "num");
  if (!cfg.jargon_dict.empty()) apply_jargon(segs, cfg.jargon_dict);

  if (cfg.lowercase_if_shouty) {
    std::string original;
    for (const auto& s : segs)
      if (!s.inserted) original += s.text;
    if (is_shouty(original)) {
      for (auto& s : segs)
        if (!s.inserted)
          for (auto& c : s.text) c = ascii_lower(c);
    }
  }

  std::string out;
  for (const auto& s : segs) out += s.text;
  return out;
}

JargonDict builtin_jargon() {
  return {
      {"qar", "Qatar currency"},
      {"qling", "browsing Qatar forum"},
      {"ql", "Qatar forum"},
      {"villagio", "Qatar shopping center"},
      {"doha", "Doha"},
      {"qatar", "Qatar"},
  };
}

JargonDict parse_jargon(std::string_view text) {
  JargonDict dict;
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos)
      throw DataError("jargon line " + std::to_string(line_no) + ": expected key<TAB>replacement");
    auto key = line.substr(0, tab);
    if (key.empty()) throw DataError("jargon line " + std::to_string(line_no) + ": empty key");
    dict.emplace_back(std::string(key), std::string(line.substr(tab + 1)));
  }
  return dict;
}

JargonDict load_jargon(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open jargon dictionary '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_jargon(ss.str());
}

}  // namespace drr::preprocess
