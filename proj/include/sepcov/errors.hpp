#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sepcov {

// Invalid arguments: shapes, index ranges, ordering of grid points.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A request would exceed a configured memory or size cap.
class ResourceError : public std::runtime_error {
 public:
  ResourceError(const std::string& what, std::size_t required_bytes)
      : std::runtime_error(what), required_bytes_(required_bytes) {}
  std::size_t required_bytes() const { return required_bytes_; }

 private:
  std::size_t required_bytes_;
};

// A separable approximation is undefined for the given kernel
// (vanishing trace, vanishing partial product marginal).
class DegenerateKernelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The leading flip-kernel eigenvalue is not simple, so the SPCA factors
// are not identified.
class SpectralDegeneracyError : public DegenerateKernelError {
 public:
  SpectralDegeneracyError(const std::string& what, double lambda1, double lambda2)
      : DegenerateKernelError(what), lambda1_(lambda1), lambda2_(lambda2) {}
  double lambda1() const { return lambda1_; }
  double lambda2() const { return lambda2_; }

 private:
  double lambda1_;
  double lambda2_;
};

// Iterative solver failed to reach its tolerance.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// Malformed sample file; `location` is a 1-based line (CSV) or byte offset (BIN).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t location)
      : std::runtime_error(what), location_(location) {}
  std::size_t location() const { return location_; }

 private:
  std::size_t location_;
};

}  // namespace sepcov
