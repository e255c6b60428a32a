#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace topicforge::binary {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

// Appends little-endian encodings to a byte buffer.
class Writer {
 public:
  template <typename T>
    requires std::is_arithmetic_v<T>
  void put(T value) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
      for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
    }
    buffer_.insert(buffer_.end(), bytes, bytes + sizeof(T));
  }

  void put_bytes(std::string_view bytes) { buffer_.insert(buffer_.end(), bytes.begin(), bytes.end()); }

  const std::vector<char>& buffer() const noexcept { return buffer_; }

 private:
  std::vector<char> buffer_;
};

// Reads little-endian values from a byte buffer. Running past the end calls
// on_truncated, which must throw.
template <typename OnTruncated>
class Reader {
 public:
  Reader(std::string_view bytes, OnTruncated on_truncated) : bytes_(bytes), on_truncated_(on_truncated) {}

  template <typename T>
    requires std::is_arithmetic_v<T>
  T get() {
    need(sizeof(T));
    unsigned char raw[sizeof(T)];
    std::memcpy(raw, bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
      for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(raw[i], raw[sizeof(T) - 1 - i]);
    }
    pos_ += sizeof(T);
    T value;
    std::memcpy(&value, raw, sizeof(T));
    return value;
  }

  std::string_view get_bytes(std::size_t n) {
    need(n);
    auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) {
    if (bytes_.size() - pos_ < n) on_truncated_();
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
  OnTruncated on_truncated_;
};

}  // namespace topicforge::binary
