#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace holograph {

// Malformed binary file (checkpoint, sample store). Carries the byte offset
// at which decoding stopped and the section being read.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::uint64_t offset, std::string section)
      : std::runtime_error(what + " (section '" + section + "', byte offset " +
                           std::to_string(offset) + ")"),
        offset_(offset),
        section_(std::move(section)) {}

  std::uint64_t offset() const { return offset_; }
  const std::string& section() const { return section_; }

 private:
  std::uint64_t offset_;
  std::string section_;
};

// Non-finite value produced inside the optical chain; names the layer.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Text-file parse failure with 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Bad run configuration (unknown key, out-of-range value).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace holograph
