#include "holograph/io_util.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "holograph/errors.hpp"

namespace holograph {

namespace {

// All formats are little-endian regardless of host. These helpers keep the
// byte order explicit instead of relying on memcpy of host-endian values.
void put_u32_le(std::vector<std::uint8_t>& buf, std::uint32_t v) {
  buf.push_back(static_cast<std::uint8_t>(v & 0xff));
  buf.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
  buf.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
  buf.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

std::uint64_t f64_bits(double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  return bits;
}

[[noreturn]] void throw_io(const char* what, const std::filesystem::path& path) {
  throw std::filesystem::filesystem_error(
      what, path, std::error_code(errno != 0 ? errno : EIO, std::generic_category()));
}

double bits_f64(std::uint64_t bits) {
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

}  // namespace

void BinWriter::u8(std::uint8_t v) { buf_.push_back(v); }

void BinWriter::u32(std::uint32_t v) { put_u32_le(buf_, v); }

void BinWriter::f64(double v) {
  std::uint64_t bits = f64_bits(v);
  for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>((bits >> (8 * i)) & 0xff));
}

void BinWriter::bytes(const void* data, std::size_t len) {
  const auto* p = static_cast<const std::uint8_t*>(data);
  buf_.insert(buf_.end(), p, p + len);
}

void BinWriter::f64_array(const double* data, std::size_t count) {
  buf_.reserve(buf_.size() + count * 8);
  for (std::size_t i = 0; i < count; ++i) f64(data[i]);
}

void BinWriter::commit(const std::filesystem::path& path) const {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw_io("cannot open for writing", tmp);
    out.write(reinterpret_cast<const char*>(buf_.data()),
              static_cast<std::streamsize>(buf_.size()));
    if (!out) throw_io("write failed", tmp);
  }
  std::filesystem::rename(tmp, path);
}

BinReader BinReader::from_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (std::filesystem::is_directory(path, ec)) {
    errno = EISDIR;
    throw_io("cannot open", path);
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_io("cannot open", path);
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  return BinReader(std::move(data));
}

void BinReader::need(std::size_t len, const std::string& section) const {
  if (pos_ + len > buf_.size())
    throw FormatError("unexpected end of file", pos_, section);
}

std::uint8_t BinReader::u8(const std::string& section) {
  need(1, section);
  return buf_[pos_++];
}

std::uint32_t BinReader::u32(const std::string& section) {
  need(4, section);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf_[pos_ + i]) << (8 * i);
  pos_ += 4;
  return v;
}

double BinReader::f64(const std::string& section) {
  need(8, section);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf_[pos_ + i]) << (8 * i);
  pos_ += 8;
  return bits_f64(bits);
}

void BinReader::f64_array(double* out, std::size_t count, const std::string& section) {
  for (std::size_t i = 0; i < count; ++i) out[i] = f64(section);
}

void BinReader::raw(void* out, std::size_t len, const std::string& section) {
  need(len, section);
  std::memcpy(out, buf_.data() + pos_, len);
  pos_ += len;
}

std::string format_double(double v) {
  // Find the shortest precision that round-trips; falls back to %.17g which
  // is always exact for IEEE doubles.
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v || (std::isnan(back) && std::isnan(v))) return buf;
  }
  return buf;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw_io("cannot open for writing", tmp);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw_io("write failed", tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace holograph
