#pragma once

#include <stdexcept>
#include <string>

namespace homdim {

enum class ErrorKind {
  Input,     // malformed or out-of-range user input
  Range,     // query outside a computed range (e.g. histogram cutoff)
  Io,
  Resource,  // enumeration budget exceeded
  Numeric,   // root bracketing, indefinite Hessians, noisy differences
  Domain,    // mathematically undefined at the requested point
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct InputError : Error {
  explicit InputError(const std::string& w) : Error(ErrorKind::Input, w) {}
};
struct RangeError : Error {
  explicit RangeError(const std::string& w) : Error(ErrorKind::Range, w) {}
};
struct IoError : Error {
  explicit IoError(const std::string& w) : Error(ErrorKind::Io, w) {}
};
struct ResourceError : Error {
  explicit ResourceError(const std::string& w) : Error(ErrorKind::Resource, w) {}
};
struct NumericError : Error {
  explicit NumericError(const std::string& w) : Error(ErrorKind::Numeric, w) {}
};
struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error(ErrorKind::Domain, w) {}
};

}  // namespace homdim
