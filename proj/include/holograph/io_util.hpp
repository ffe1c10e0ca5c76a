#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace holograph {

// Little-endian binary writer used for checkpoints and sample stores.
// Accumulates in memory; commit() writes to a temp file and renames so a
// crash never leaves a truncated file at the final path.
class BinWriter {
 public:
  void u8(std::uint8_t v);
  void u32(std::uint32_t v);
  void f64(double v);
  void bytes(const void* data, std::size_t len);
  void f64_array(const double* data, std::size_t count);

  const std::vector<std::uint8_t>& buffer() const { return buf_; }
  void commit(const std::filesystem::path& path) const;

 private:
  std::vector<std::uint8_t> buf_;
};

// Matching reader. Every accessor takes the name of the section being parsed
// so failures report both a byte offset and what the bytes were supposed to
// mean. Throws FormatError on truncation; surplus() lets callers reject
// trailing garbage.
class BinReader {
 public:
  static BinReader from_file(const std::filesystem::path& path);
  explicit BinReader(std::vector<std::uint8_t> data) : buf_(std::move(data)) {}

  std::uint8_t u8(const std::string& section);
  std::uint32_t u32(const std::string& section);
  double f64(const std::string& section);
  void f64_array(double* out, std::size_t count, const std::string& section);
  void raw(void* out, std::size_t len, const std::string& section);

  std::size_t offset() const { return pos_; }
  std::size_t surplus() const { return buf_.size() - pos_; }

 private:
  void need(std::size_t len, const std::string& section) const;

  std::vector<std::uint8_t> buf_;
  std::size_t pos_ = 0;
};

// Shortest decimal string that round-trips the double (printf %.17g pruned).
std::string format_double(double v);

// Write text to path atomically (temp file in the same directory + rename).
void write_text_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace holograph
