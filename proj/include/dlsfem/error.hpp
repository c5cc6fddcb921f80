#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace dlsfem {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: malformed meshes, out-of-range parameters, empty Dirichlet boundary.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A patch whose collocation points cannot determine a polynomial of the requested degree.
class UnisolvenceError : public Error {
 public:
  UnisolvenceError(int element, const std::string& what)
      : Error("element " + std::to_string(element) + ": " + what), element_(element) {}
  int element() const noexcept { return element_; }

 private:
  int element_;
};

/// The iterative solver failed; carries the relative residual after every iteration.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, std::vector<double> history)
      : Error(what), history_(std::move(history)) {}
  const std::vector<double>& residual_history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace dlsfem
