#pragma once

#include <stdexcept>
#include <string>

namespace sicra {

enum class ErrorKind {
  Domain,    // argument outside the mathematical domain
  Config,    // inconsistent or incomplete configuration
  Protocol,  // feedback that cannot occur under the access protocol
  Numeric,   // a numerical procedure failed to converge or bracket
  Io,        // file system or parse failure
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace sicra
