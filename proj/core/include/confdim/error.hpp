#pragma once

#include <stdexcept>
#include <string>

namespace confdim {

// Every library failure carries a stable machine-readable code so the CLI can
// map it onto exit codes and error JSON without string matching.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

#define CONFDIM_ERROR_TYPE(Name)                                   \
  class Name : public Error {                                      \
   public:                                                         \
    explicit Name(const std::string& what) : Error(#Name, what) {} \
  };

CONFDIM_ERROR_TYPE(DepthExceeded)
CONFDIM_ERROR_TYPE(InvalidAddress)
CONFDIM_ERROR_TYPE(PointOutsideSpace)
CONFDIM_ERROR_TYPE(Unresolved)
CONFDIM_ERROR_TYPE(DegenerateRectangle)
CONFDIM_ERROR_TYPE(UnsupportedFamily)
CONFDIM_ERROR_TYPE(InvalidFamily)
CONFDIM_ERROR_TYPE(InvalidP)
CONFDIM_ERROR_TYPE(InadmissibleInput)
CONFDIM_ERROR_TYPE(PathBudgetExceeded)
CONFDIM_ERROR_TYPE(Disconnected)
CONFDIM_ERROR_TYPE(BracketInvalid)
CONFDIM_ERROR_TYPE(DivergentRate)
CONFDIM_ERROR_TYPE(ParseError)

#undef CONFDIM_ERROR_TYPE

}  // namespace confdim
