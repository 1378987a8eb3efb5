#pragma once

#include <stdexcept>
#include <string>

namespace cennq {

// Precondition violations use std::invalid_argument. The two types below
// separate bad input data (files, manifests) from numerical failure so the
// CLI can map them to distinct exit codes.

/// Malformed or unreadable input data (images, manifests, JSON documents).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// A computation left the finite domain (diverging state, NaN objective).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cennq
