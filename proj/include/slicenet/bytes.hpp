#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "slicenet/error.hpp"

namespace slicenet {

enum class ByteOrder { Little, Big };

namespace detail {

template <typename T>
T byteswap_value(T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
  std::memcpy(&v, b, sizeof(T));
  return v;
}

constexpr ByteOrder native_order() {
  return std::endian::native == std::endian::little ? ByteOrder::Little : ByteOrder::Big;
}

}  // namespace detail

/// Appends fixed-width scalars to a byte buffer in a chosen byte order.
class ByteWriter {
 public:
  explicit ByteWriter(ByteOrder order = ByteOrder::Little) : order_(order) {}

  template <typename T>
  void put(T v) {
    if (order_ != detail::native_order()) v = detail::byteswap_value(v);
    const auto* p = reinterpret_cast<const std::byte*>(&v);
    buf_.insert(buf_.end(), p, p + sizeof(T));
  }

  void put_bytes(std::string_view s) {
    const auto* p = reinterpret_cast<const std::byte*>(s.data());
    buf_.insert(buf_.end(), p, p + s.size());
  }

  void pad_to(std::size_t size) {
    if (buf_.size() < size) buf_.resize(size, std::byte{0});
  }

  std::size_t size() const { return buf_.size(); }
  std::vector<std::byte>& buffer() { return buf_; }
  std::vector<std::byte> take() { return std::move(buf_); }

 private:
  ByteOrder order_;
  std::vector<std::byte> buf_;
};

/// Bounds-checked cursor over a byte span; overruns raise TruncatedData.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::byte> data, ByteOrder order = ByteOrder::Little)
      : data_(data), order_(order) {}

  template <typename T>
  T get() {
    require(sizeof(T));
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    if (order_ != detail::native_order()) v = detail::byteswap_value(v);
    return v;
  }

  std::string get_string(std::size_t n) {
    require(n);
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  void seek(std::size_t pos) { pos_ = pos; }
  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return pos_ <= data_.size() ? data_.size() - pos_ : 0; }
  void set_order(ByteOrder order) { order_ = order; }

 private:
  void require(std::size_t n) const {
    if (pos_ > data_.size() || data_.size() - pos_ < n)
      throw Error(ErrorCode::TruncatedData, "need " + std::to_string(n) + " bytes at offset " +
                                                std::to_string(pos_) + ", stream has " +
                                                std::to_string(data_.size()));
  }

  std::span<const std::byte> data_;
  std::size_t pos_ = 0;
  ByteOrder order_;
};

inline std::span<const std::byte> as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::byte*>(s.data()), s.size()};
}

/// Whole-file helpers; failures raise ErrorCode::Io.
std::vector<std::byte> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::byte> bytes);
void write_text_file(const std::string& path, std::string_view text);
std::string read_text_file(const std::string& path);

}  // namespace slicenet
