#pragma once

#include <bit>
#include <cstring>
#include <fstream>
#include <string>
#include <type_traits>

#include "ssb/errors.hpp"

// Little-endian scalar serialization shared by the dataset and checkpoint
// formats (docs/formats.md).

namespace ssb::detail {

static_assert(std::endian::native == std::endian::little,
              "serializers assume a little-endian host");

template <class T>
void put(std::string& buf, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  buf.append(bytes, sizeof(T));
}

class Reader {
 public:
  Reader(const char* data, std::size_t size) : p_(data), end_(data + size) {}

  template <class T>
  T get() {
    static_assert(std::is_trivially_copyable_v<T>);
    if (static_cast<std::size_t>(end_ - p_) < sizeof(T))
      throw TruncationError("file truncated");
    T v;
    std::memcpy(&v, p_, sizeof(T));
    p_ += sizeof(T);
    return v;
  }

  void raw(void* dst, std::size_t n) {
    if (static_cast<std::size_t>(end_ - p_) < n)
      throw TruncationError("file truncated");
    std::memcpy(dst, p_, n);
    p_ += n;
  }

  std::size_t remaining() const { return end_ - p_; }
  bool at_end() const { return p_ == end_; }

 private:
  const char* p_;
  const char* end_;
};

inline void write_file(const std::string& path, const std::string& buf) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open for writing: " + path);
  f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!f) throw IoError("write failed: " + path);
}

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace ssb::detail
