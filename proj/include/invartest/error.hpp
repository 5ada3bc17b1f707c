#ifndef INVARTEST_ERROR_HPP
#define INVARTEST_ERROR_HPP

#include <stdexcept>
#include <string>

namespace invartest {

// Failure categories surfaced by the library. The CLI maps these onto its
// exit-code contract; library users can switch on code() instead of parsing
// messages.
enum class Errc {
  NonPd,            // matrix fails the positive-definite (or p.s.d.) check
  DimMismatch,      // incompatible dimensions or invalid block split
  NotSymmetric,     // asymmetry beyond tolerance
  RankMismatch,     // two inputs have different numerical rank
  RangeMismatch,    // two inputs have different column spaces
  TooFewRows,       // dataset too small to form the estimators
  NonFinite,        // NaN or infinity in the input
  SingularScatter,  // scatter matrix is not positive definite
  SingularGroup,    // group element block is singular
  OutOfRange,       // scalar argument outside its admissible range
};

const char* to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

inline const char* to_string(Errc code) {
  switch (code) {
    case Errc::NonPd: return "NON_PD";
    case Errc::DimMismatch: return "DIM";
    case Errc::NotSymmetric: return "NOT_SYMMETRIC";
    case Errc::RankMismatch: return "RANK_MISMATCH";
    case Errc::RangeMismatch: return "RANGE_MISMATCH";
    case Errc::TooFewRows: return "TOO_FEW_ROWS";
    case Errc::NonFinite: return "NON_FINITE";
    case Errc::SingularScatter: return "SINGULAR_SCATTER";
    case Errc::SingularGroup: return "SINGULAR_G";
    case Errc::OutOfRange: return "OUT_OF_RANGE";
  }
  return "UNKNOWN";
}

}  // namespace invartest

#endif  // INVARTEST_ERROR_HPP
