#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sitad::detail {

// Error raised by readers on short reads, bad magic, version or checksum
// mismatches. The index loader maps it to a data error at the CLI surface.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr std::uint32_t kCrc32Poly = 0xEDB88320u;

inline const std::array<std::uint32_t, 256>& crc32_table() {
  static const std::array<std::uint32_t, 256> table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) {
        c = (c & 1u) ? (kCrc32Poly ^ (c >> 1)) : (c >> 1);
      }
      t[i] = c;
    }
    return t;
  }();
  return table;
}

inline std::uint32_t crc32_update(std::uint32_t crc, const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  const auto& table = crc32_table();
  crc ^= 0xFFFFFFFFu;
  for (std::size_t i = 0; i < len; ++i) {
    crc = table[(crc ^ p[i]) & 0xFFu] ^ (crc >> 8);
  }
  return crc ^ 0xFFFFFFFFu;
}

// Little-endian writer that keeps a running CRC32 of every byte written.
class Writer {
 public:
  explicit Writer(std::ostream& os) : os_(os) {}

  void bytes(const void* data, std::size_t len) {
    os_.write(static_cast<const char*>(data), static_cast<std::streamsize>(len));
    if (!os_) throw IoError("write failed");
    crc_ = crc32_update(crc_, data, len);
    written_ += len;
  }

  void u8(std::uint8_t v) { bytes(&v, 1); }

  void u32(std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 4);
  }

  void u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 8);
  }

  void u32_array(std::span<const std::uint32_t> values) { u32_array(values.data(), values.size()); }
  void u64_array(std::span<const std::uint64_t> values) { u64_array(values.data(), values.size()); }

  void u32_array(const std::uint32_t* data, std::size_t len) {
    for (std::size_t i = 0; i < len; ++i) u32(data[i]);
  }

  void u64_array(const std::uint64_t* data, std::size_t len) {
    for (std::size_t i = 0; i < len; ++i) u64(data[i]);
  }

  std::uint32_t crc() const { return crc_; }
  std::uint64_t bytes_written() const { return written_; }

 private:
  std::ostream& os_;
  std::uint32_t crc_ = 0;
  std::uint64_t written_ = 0;
};

// Little-endian reader mirroring Writer, CRC32 over every byte read.
class Reader {
 public:
  explicit Reader(std::istream& is) : is_(is) {}

  void bytes(void* data, std::size_t len) {
    is_.read(static_cast<char*>(data), static_cast<std::streamsize>(len));
    if (static_cast<std::size_t>(is_.gcount()) != len) {
      throw IoError("unexpected end of file");
    }
    crc_ = crc32_update(crc_, data, len);
    read_ += len;
  }

  std::uint8_t u8() {
    std::uint8_t v;
    bytes(&v, 1);
    return v;
  }

  std::uint32_t u32() {
    unsigned char b[4];
    bytes(b, 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
  }

  std::uint64_t u64() {
    unsigned char b[8];
    bytes(b, 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }

  std::vector<std::uint32_t> u32_vector(std::size_t len) {
    std::vector<std::uint32_t> v(len);
    for (auto& x : v) x = u32();
    return v;
  }

  std::vector<std::uint64_t> u64_vector(std::size_t len) {
    std::vector<std::uint64_t> v(len);
    for (auto& x : v) x = u64();
    return v;
  }

  std::uint32_t crc() const { return crc_; }
  std::uint64_t bytes_read() const { return read_; }

 private:
  std::istream& is_;
  std::uint32_t crc_ = 0;
  std::uint64_t read_ = 0;
};

}  // namespace sitad::detail
