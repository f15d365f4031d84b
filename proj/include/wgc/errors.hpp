#pragma once

#include <stdexcept>
#include <string>

namespace wgc {

/// Raised when a caller breaks a documented precondition (wrong
/// representation, mismatched grids, invalid parameters).
class ContractError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Raised when a computation produces non-finite values or cannot proceed
/// numerically.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
    if (!condition) throw ContractError(message);
}

}  // namespace wgc
