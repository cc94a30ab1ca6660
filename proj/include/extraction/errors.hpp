#pragma once

#include <stdexcept>
#include <string>

namespace extraction {

/// Invalid geometric or numerical input (bad domain, point outside element, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Out-of-range index handed to an assembly routine.
class AssemblyError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// A triangle is not cut into exactly two pieces by the interface; the grid
/// does not resolve the interface.
class NonSimpleCut : public std::runtime_error {
 public:
  NonSimpleCut(int triangle, const std::string& what)
      : std::runtime_error(what), triangle_(triangle) {}
  [[nodiscard]] int triangle() const noexcept { return triangle_; }

 private:
  int triangle_;
};

}  // namespace extraction
