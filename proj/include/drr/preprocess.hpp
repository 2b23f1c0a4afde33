#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace drr::preprocess {

using JargonDict = std::vector<std::pair<std::string, std::string>>;

/// Text normalization switches. Everything is off by default, which makes
/// `normalize` the identity.
struct RuleConfig {
  bool strip_emoji = false;
  bool replace_urls = false;
  bool replace_datetimes = false;
  bool replace_ordinals = false;
  bool replace_numbers = false;
  bool lowercase_if_shouty = false;
  /// Whole-token, case-insensitive replacements applied in dictionary order.
  JargonDict jargon_dict;

  /// Every rule enabled, with the built-in jargon dictionary.
  static RuleConfig all_enabled();
};

/// Applies the enabled rules in the fixed order
///   emoji -> URL -> date/hour -> ordinal -> number -> jargon -> shouty-lowercase.
/// Text inserted by a rule is never re-matched by later rules in the same
/// call, and letters inside inserted text do not count towards the shouty
/// test. normalize(normalize(t)) == normalize(t) for the built-in dictionary.
std::string normalize(std::string_view text, const RuleConfig& cfg);

/// True iff uppercase ASCII letters strictly outnumber lowercase ones.
bool is_shouty(std::string_view text) noexcept;

/// Forum jargon entries shipped with the toolkit (mirrors data/jargon.tsv).
JargonDict builtin_jargon();

/// `key<TAB>replacement` per line, `#` comments and blank lines ignored.
JargonDict load_jargon(const std::filesystem::path& path);
JargonDict parse_jargon(std::string_view text);

}  // namespace drr::preprocess
