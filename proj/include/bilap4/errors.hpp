#pragma once

#include <array>
#include <stdexcept>
#include <string>

namespace bilap4 {

/// Base class for all structured errors thrown by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// grid / domain construction
class SpecOutOfGrid : public Error {
 public:
  using Error::Error;
};
class DegenerateDomain : public Error {
 public:
  using Error::Error;
};
class InvalidDomainSpec : public Error {
 public:
  using Error::Error;
};

// quadrature
class NonfiniteIntegrand : public Error {
 public:
  NonfiniteIntegrand(double r, double value)
      : Error("non-finite integrand at r=" + std::to_string(r) + " (value " +
              std::to_string(value) + ")"),
        r(r),
        value(value) {}
  double r;
  double value;
};

// linear solvers
class NoConvergence : public Error {
 public:
  NoConvergence(int iterations, double residual, std::string stage = {})
      : Error("linear solve did not converge after " +
              std::to_string(iterations) + " iterations (residual " +
              std::to_string(residual) +
              (stage.empty() ? std::string() : ", stage " + stage) + ")"),
        iterations(iterations),
        residual(residual),
        stage(std::move(stage)) {}
  int iterations;
  double residual;
  std::string stage;
};

class JacobianSolveFailure : public Error {
 public:
  JacobianSolveFailure(int iterations, double residual)
      : Error("Jacobian solve stalled after " + std::to_string(iterations) +
              " iterations (residual " + std::to_string(residual) + ")"),
        iterations(iterations),
        residual(residual) {}
  int iterations;
  double residual;
};

// Green's function evaluation
class SourceTooCloseToBoundary : public Error {
 public:
  using Error::Error;
};
class CoincidentPoints : public Error {
 public:
  using Error::Error;
};

// reduced energy
class NonpositiveWeight : public Error {
 public:
  using Error::Error;
};
class CollidingPoints : public Error {
 public:
  using Error::Error;
};
class DuplicatePoints : public Error {
 public:
  using Error::Error;
};
class PointOnWall : public Error {
 public:
  using Error::Error;
};
class BadIndex : public Error {
 public:
  using Error::Error;
};
class NotAdmissible : public Error {
 public:
  using Error::Error;
};

// ansatz / solver
class EpsOutOfRange : public Error {
 public:
  using Error::Error;
};
class CoreUnderResolved : public Error {
 public:
  using Error::Error;
};
class OverflowGuard : public Error {
 public:
  using Error::Error;
};
class StageFailed : public Error {
 public:
  StageFailed(int index, const std::string& why)
      : Error("continuation stage " + std::to_string(index) + " failed: " +
              why),
        index(index) {}
  int index;
};

// expression parser
class SyntaxError : public Error {
 public:
  SyntaxError(size_t offset, std::string expected)
      : Error("syntax error at offset " + std::to_string(offset) +
              ", expected " + expected),
        offset(offset),
        expected(std::move(expected)) {}
  size_t offset;
  std::string expected;
};

class UnknownIdentifier : public Error {
 public:
  UnknownIdentifier(size_t offset, std::string name)
      : Error("unknown identifier '" + name + "' at offset " +
              std::to_string(offset)),
        offset(offset),
        name(std::move(name)) {}
  size_t offset;
  std::string name;
};

class DomainError : public Error {
 public:
  DomainError(std::string fn, const std::array<double, 4>& at)
      : Error("domain error in " + fn + " at point (" + std::to_string(at[0]) +
              ", " + std::to_string(at[1]) + ", " + std::to_string(at[2]) +
              ", " + std::to_string(at[3]) + ")"),
        fn(std::move(fn)),
        at(at) {}
  std::string fn;
  std::array<double, 4> at;
};

class NonFinite : public Error {
 public:
  using Error::Error;
};

}  // namespace bilap4
