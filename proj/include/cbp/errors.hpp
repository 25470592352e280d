#pragma once

#include <stdexcept>
#include <string>

namespace cbp {

// Process exit codes shared by the CLI and the error taxonomy.
enum class ExitCode : int {
  ok = 0,
  internal = 1,    // unexpected failure
  schema = 2,      // malformed input, scheme mismatch, inconsistent sample
  domain = 3,      // parameter outside a family domain, boundary estimate
  degenerate = 4,  // zero normalizer, extinct sample, all starts failed
  io = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& msg)
      : std::runtime_error(msg), code_(code) {}
  ExitCode code() const { return code_; }

 private:
  ExitCode code_;
};

struct SchemaError : Error {
  explicit SchemaError(const std::string& m) : Error(ExitCode::schema, m) {}
};
struct DomainError : Error {
  explicit DomainError(const std::string& m) : Error(ExitCode::domain, m) {}
};
struct DegenerateError : Error {
  explicit DegenerateError(const std::string& m) : Error(ExitCode::degenerate, m) {}
};
struct IoError : Error {
  explicit IoError(const std::string& m) : Error(ExitCode::io, m) {}
};

}  // namespace cbp
