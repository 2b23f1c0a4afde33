#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace drr {

/// A named, shaped array of doubles stored bit-exactly.
struct NamedArray {
  std::string name;
  std::vector<std::uint64_t> shape;
  std::vector<double> data;
};

/// Versioned binary container shared by checkpoints and classical models.
///
/// Layout (all integers little-endian):
///   "DRRC" u32:version str:kind
///   u32:n { str:key str:value }          string metadata
///   u32:n { str:key f64:value }          scalar metadata
///   u32:n { str:name u32:rank u64[rank]:dims u64:payload_bytes f64[]:payload }
///   "END."
/// where str is u32:length followed by raw bytes and f64 is the IEEE-754
/// binary64 bit pattern.
struct Container {
  static constexpr std::uint32_t kVersion = 1;

  std::string kind;
  std::vector<std::pair<std::string, std::string>> strings;
  std::vector<std::pair<std::string, double>> scalars;
  std::vector<NamedArray> arrays;

  void set_string(std::string key, std::string value);
  void set_scalar(std::string key, double value);
  void add_array(std::string name, std::vector<std::uint64_t> shape, std::vector<double> data);

  const std::string& string(const std::string& key) const;
  double scalar(const std::string& key) const;
  std::optional<double> find_scalar(const std::string& key) const;
  const NamedArray& array(const std::string& name) const;
  const NamedArray* find_array(const std::string& name) const;
};

std::vector<char> encode_container(const Container& c);
Container decode_container(const std::vector<char>& bytes);

void save_container(const Container& c, const std::filesystem::path& path);
Container load_container(const std::filesystem::path& path);

}  // namespace drr
