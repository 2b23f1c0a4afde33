#include "drr/container.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "drr/error.hpp"

namespace drr {

namespace {

constexpr char kMagic[4] = {'D', 'R', 'R', 'C'};
constexpr char kTrailer[4] = {'E', 'N', 'D', '.'};

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

class Writer {
 public:
  template <typename T>
  void put(T v) {
    v = to_little(v);
    const auto* p = reinterpret_cast<const char*>(&v);
    out_.insert(out_.end(), p, p + sizeof(T));
  }
  void put_f64(double d) { put(std::bit_cast<std::uint64_t>(d)); }
  void put_str(const std::string& s) {
    put(static_cast<std::uint32_t>(s.size()));
    out_.insert(out_.end(), s.begin(), s.end());
  }
  void put_raw(const char* p, std::size_t n) { out_.insert(out_.end(), p, p + n); }
  std::vector<char> take() { return std::move(out_); }

 private:
  std::vector<char> out_;
};

class Reader {
 public:
  explicit Reader(const std::vector<char>& in) : in_(in) {}

  void need(std::size_t n) const {
    if (pos_ + n > in_.size() || pos_ + n < pos_) {
      throw TruncatedError("container truncated at byte " + std::to_string(pos_) +
                           " (needed " + std::to_string(n) + " more bytes)");
    }
  }
  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, in_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return to_little(v);
  }
  double get_f64() { return std::bit_cast<double>(get<std::uint64_t>()); }
  std::string get_str() {
    const auto n = get<std::uint32_t>();
    need(n);
    std::string s(in_.data() + pos_, n);
    pos_ += n;
    return s;
  }
  bool match(const char (&tag)[4]) {
    need(4);
    const bool ok = std::memcmp(in_.data() + pos_, tag, 4) == 0;
    pos_ += 4;
    return ok;
  }

 private:
  const std::vector<char>& in_;
  std::size_t pos_ = 0;
};

}  // namespace

void Container::set_string(std::string key, std::string value) {
  for (auto& [k, v] : strings) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  strings.emplace_back(std::move(key), std::move(value));
}

void Container::set_scalar(std::string key, double value) {
  for (auto& [k, v] : scalars) {
    if (k == key) {
      v = value;
      return;
    }
  }
  scalars.emplace_back(std::move(key), value);
}

void Container::add_array(std::string name, std::vector<std::uint64_t> shape,
                          std::vector<double> data) {
  std::uint64_t count = 1;
  for (auto d : shape) count *= d;
  if (count != data.size()) {
    throw ShapeError("array '" + name + "' shape declares " + std::to_string(count) + " values but " +
                     std::to_string(data.size()) + " were given");
  }
  arrays.push_back({std::move(name), std::move(shape), std::move(data)});
}

const std::string& Container::string(const std::string& key) const {
  for (const auto& [k, v] : strings)
    if (k == key) return v;
  throw DataError("container '" + kind + "' has no string field '" + key + "'");
}

std::optional<double> Container::find_scalar(const std::string& key) const {
  for (const auto& [k, v] : scalars)
    if (k == key) return v;
  return std::nullopt;
}

double Container::scalar(const std::string& key) const {
  if (auto v = find_scalar(key)) return *v;
  throw DataError("container '" + kind + "' has no scalar field '" + key + "'");
}

const NamedArray* Container::find_array(const std::string& name) const {
  for (const auto& a : arrays)
    if (a.name == name) return &a;
  return nullptr;
}

const NamedArray& Container::array(const std::string& name) const {
  if (const auto* a = find_array(name)) return *a;
  throw DataError("container '" + kind + "' has no array '" + name + "'");
}

std::vector<char> encode_container(const Container& c) {
  Writer w;
  w.put_raw(kMagic, 4);
  w.put(Container::kVersion);
  w.put_str(c.kind);
  w.put(static_cast<std::uint32_t>(c.strings.size()));
  for (const auto& [k, v] : c.strings) {
    w.put_str(k);
    w.put_str(v);
  }
  w.put(static_cast<std::uint32_t>(c.scalars.size()));
  for (const auto& [k, v] : c.scalars) {
    w.put_str(k);
    w.put_f64(v);
  }
  w.put(static_cast<std::uint32_t>(c.arrays.size()));
  for (const auto& a : c.arrays) {
    w.put_str(a.name);
    w.put(static_cast<std::uint32_t>(a.shape.size()));
    for (auto d : a.shape) w.put(d);
    w.put(static_cast<std::uint64_t>(a.data.size() * sizeof(double)));
    for (double d : a.data) w.put_f64(d);
  }
  w.put_raw(kTrailer, 4);
  return w.take();
}

Container decode_container(const std::vector<char>& bytes) {
  Reader r(bytes);
  if (!r.match(kMagic)) throw DataError("not a model container (bad magic)");
  const auto version = r.get<std::uint32_t>();
  if (version != Container::kVersion) {
    throw VersionError("unsupported container version " + std::to_string(version) +
                       " (expected " + std::to_string(Container::kVersion) + ")");
  }
  Container c;
  c.kind = r.get_str();
  for (auto n = r.get<std::uint32_t>(); n > 0; --n) {
    auto k = r.get_str();
    c.strings.emplace_back(std::move(k), r.get_str());
  }
  for (auto n = r.get<std::uint32_t>(); n > 0; --n) {
    auto k = r.get_str();
    c.scalars.emplace_back(std::move(k), r.get_f64());
  }
  for (auto n = r.get<std::uint32_t>(); n > 0; --n) {
    NamedArray a;
    a.name = r.get_str();
    const auto rank = r.get<std::uint32_t>();
    if (rank > 8) throw ShapeError("array '" + a.name + "' has implausible rank " + std::to_string(rank));
    std::uint64_t count = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      a.shape.push_back(r.get<std::uint64_t>());
      count *= a.shape.back();
    }
    const auto payload = r.get<std::uint64_t>();
    if (payload != count * sizeof(double)) {
      throw ShapeError("array '" + a.name + "' shape declares " + std::to_string(count) +
                       " values but payload holds " + std::to_string(payload / sizeof(double)));
    }
    r.need(payload);
    a.data.resize(count);
    for (auto& d : a.data) d = r.get_f64();
    c.arrays.push_back(std::move(a));
  }
  if (!r.match(kTrailer)) throw DataError("container trailer missing or corrupt");
  return c;
}

void save_container(const Container& c, const std::filesystem::path& path) {
  const auto bytes = encode_container(c);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

Container load_container(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_container(bytes);
}

}  // namespace drr
