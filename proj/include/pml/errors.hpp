#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pml {

/// Requested ordering parameter is not below the loss bound s_eta.
class OrderingBoundError : public std::domain_error {
 public:
  OrderingBoundError(double s, double eta, double s_eta);

  double s() const noexcept { return s_; }
  double eta() const noexcept { return eta_; }
  double s_eta() const noexcept { return s_eta_; }

 private:
  double s_;
  double eta_;
  double s_eta_;
};

/// Malformed dataset or moments file; `line` is 1-based, 0 if not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what);

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace pml
