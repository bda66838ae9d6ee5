#pragma once

#include <stdexcept>
#include <string>

namespace fwlab {

/// A caller broke an operation's precondition (length/grid mismatch, bad index).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A parameter outside the supported set, e.g. an L^p norm with p not in {2, inf}.
class UnsupportedParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A ratio or fit whose denominator or data is degenerate.
class DegenerateInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Peak too close to the periodic seam, or similar geometric violations.
class DomainViolation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Sequence index n whose spectrum does not fit under the dealiasing cutoff.
class ResolvabilityError : public std::invalid_argument {
 public:
  ResolvabilityError(int requested_n, int max_n)
      : std::invalid_argument("sequence index n=" + std::to_string(requested_n) +
                              " is not resolvable on this grid; max admissible n is " +
                              std::to_string(max_n)),
        requested_n_(requested_n),
        max_n_(max_n) {}

  int requested_n() const noexcept { return requested_n_; }
  int max_n() const noexcept { return max_n_; }

 private:
  int requested_n_;
  int max_n_;
};

}  // namespace fwlab
