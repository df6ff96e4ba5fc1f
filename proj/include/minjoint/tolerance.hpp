#pragma once

#include <stdexcept>
#include <string>

namespace minjoint {

/// Numerical tolerances shared by every module.
///
/// Effects are bounded by the identity, so entries are O(1) and absolute
/// thresholds double as relative ones. `rank` is relative wherever it is
/// compared against a Gram determinant or a singular-value ratio.
struct Tolerance {
    double herm = 1e-9;      // max |E - E^dagger| entrywise
    double pos = 1e-10;      // smallest eigenvalue must be >= -pos
    double norm = 1e-9;      // normalization / residual checks
    double rank = 1e-9;      // relative rank and zero-effect threshold
    double boundary = 1e-7;  // strict-inequality band

    void validate() const {
        if (herm < 0 || pos < 0 || norm < 0 || rank < 0 || boundary < 0) {
            throw std::invalid_argument("tolerances must be nonnegative");
        }
    }
};

/// Enumeration exceeded its combinatorial budget or dimension cap.
class CapExceeded : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A numerical procedure failed (cycling guard, unbounded polytope, residual
/// check after a solve).
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Two decision routes that must agree did not.
class ConsistencyError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace minjoint
