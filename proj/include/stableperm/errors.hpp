#pragma once

#include <stdexcept>
#include <string>

namespace stableperm {

/// Malformed input or a violated precondition. The CLI maps it to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A hard size cap was exceeded (brute-force enumeration, profile scans). Exit code 2.
class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Filesystem failure, always carrying the offending path. Exit code 3.
class IoError : public std::runtime_error {
 public:
  IoError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace stableperm
