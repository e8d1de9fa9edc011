#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace freestop {

/// Failure categories. The command line tool maps these onto exit codes.
enum class ErrorKind {
  Configuration,  ///< inconsistent steps, CFL violation, bad measure, bad file
  Domain,         ///< argument outside the domain of a cost or Hamiltonian
  Structural,     ///< objects built on different lattices
  Numerical,      ///< non-convergence or divergence
  Infeasible,     ///< target unreachable; carries a certificate
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorKind::Configuration, what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what)
      : Error(ErrorKind::Domain, what) {}
};

class StructuralError : public Error {
 public:
  explicit StructuralError(const std::string& what)
      : Error(ErrorKind::Structural, what) {}
};

/// Raised on non-convergence. `history` holds (objective, residual) pairs of
/// the run that failed, most recent last.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what,
                 std::vector<std::array<double, 2>> history = {})
      : Error(ErrorKind::Numerical, what), history_(std::move(history)) {}

  const std::vector<std::array<double, 2>>& history() const noexcept {
    return history_;
  }

 private:
  std::vector<std::array<double, 2>> history_;
};

/// Raised when a linear program has no feasible point. The certificate `y`
/// satisfies A^T y <= 0 and b^T y > 0 for the equality system A x = b.
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, std::vector<double> certificate)
      : Error(ErrorKind::Infeasible, what),
        certificate_(std::move(certificate)) {}

  const std::vector<double>& certificate() const noexcept {
    return certificate_;
  }

 private:
  std::vector<double> certificate_;
};

}  // namespace freestop
