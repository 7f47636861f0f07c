#pragma once

#include <stdexcept>
#include <string>

namespace debias {

enum class ErrorKind {
  contract,     // precondition / invariant violated by the caller
  domain,       // objective evaluated outside its domain
  numeric,      // non-finite value, degenerate denominator, failed factorization
  unsupported,  // method needs an oracle the objective does not provide
  config,       // invalid parameter combination
  parse,        // malformed input file
  io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) throw Error(kind, what);
}

}  // namespace debias
