#pragma once

#include <stdexcept>
#include <string>

namespace gnnlogic {

enum class ErrorKind {
  invalid,  // precondition violated or malformed value
  parse,    // text input rejected
  guard,    // resource guard exceeded
  ceiling,  // trace ceiling exceeded
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error invalid_error(const std::string& what) { return Error(ErrorKind::invalid, what); }
inline Error parse_error(const std::string& what) { return Error(ErrorKind::parse, what); }
inline Error guard_error(const std::string& what) { return Error(ErrorKind::guard, what); }
inline Error ceiling_error(const std::string& what) { return Error(ErrorKind::ceiling, what); }

}  // namespace gnnlogic
