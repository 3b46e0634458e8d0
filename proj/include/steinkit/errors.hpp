#pragma once

#include <stdexcept>
#include <string>

namespace steinkit {

/// Malformed or invalid distribution document / arguments.
class SpecError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A computation could not be carried out to the requested accuracy
/// (underflow, wrap-around, division by a vanishing kernel, ...).
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// The requested operation needs a Stein kernel but the law has none.
class ExistenceError : public std::runtime_error {
  public:
    ExistenceError(const std::string& what, bool degenerate)
        : std::runtime_error(what), degenerate_(degenerate) {}

    bool degenerate() const noexcept { return degenerate_; }

  private:
    bool degenerate_;
};

}  // namespace steinkit
