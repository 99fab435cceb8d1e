#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace synthner {

// Malformed or schema-violating input data. line is 1-based, 0 when unknown.
class DataError : public std::runtime_error {
 public:
  DataError(const std::string& source, std::size_t line, const std::string& what)
      : std::runtime_error(format(source, line, what)), source_(source), line_(line) {}

  const std::string& source() const { return source_; }
  std::size_t line() const { return line_; }

 private:
  static std::string format(const std::string& source, std::size_t line,
                            const std::string& what) {
    std::string out = source;
    if (line > 0) out += ":" + std::to_string(line);
    if (!out.empty()) out += ": ";
    return out + what;
  }

  std::string source_;
  std::size_t line_;
};

}  // namespace synthner
