#pragma once

#include <stdexcept>
#include <string>

namespace coreset {

/// Bad data reaching the library from outside: unreadable files, ragged
/// CSV rows, non-finite matrix entries.
class input_error : public std::runtime_error {
 public:
  explicit input_error(const std::string& what) : std::runtime_error(what) {}
};

/// An algorithm could not complete within its numerical contract
/// (singular solve, reduction that stopped making progress).
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace coreset
