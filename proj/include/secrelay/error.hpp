#pragma once

#include <stdexcept>
#include <string>

namespace secrelay {

/// Base class for every error raised by the library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configuration violates a structural precondition (e.g. more taps than
/// subcarriers, non-positive power budget).
class invalid_configuration : public error {
 public:
  using error::error;
};

/// An assignment does not map every subcarrier to exactly one (relay, user)
/// pair, or does not match the system dimensions.
class invalid_assignment : public error {
 public:
  using error::error;
};

/// Non-finite or out-of-domain numerical input.
class invalid_input : public error {
 public:
  using error::error;
};

class io_error : public error {
 public:
  using error::error;
};

}  // namespace secrelay
