#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace poissonkit {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t position, const std::string& expected)
      : Error("syntax error at position " + std::to_string(position) +
              ": expected " + expected),
        position_(position),
        expected_(expected) {}
  std::size_t position() const { return position_; }
  const std::string& expected() const { return expected_; }

 private:
  std::size_t position_;
  std::string expected_;
};

class UnknownIdentifier : public Error {
 public:
  explicit UnknownIdentifier(const std::string& name)
      : Error("unknown identifier '" + name + "'"), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class ArityError : public Error {
 public:
  ArityError(const std::string& function, std::size_t got)
      : Error("function '" + function + "' called with " +
              std::to_string(got) + " argument(s)"),
        function_(function),
        got_(got) {}
  const std::string& function() const { return function_; }
  std::size_t got() const { return got_; }

 private:
  std::string function_;
  std::size_t got_;
};

/// A partial function was evaluated outside its domain.
class DomainError : public Error {
 public:
  DomainError(const std::string& node, const std::vector<double>& point);
  const std::string& node() const { return node_; }
  const std::vector<double>& point() const { return point_; }

 private:
  std::string node_;
  std::vector<double> point_;
};

/// Wrong vector length, index out of range, inconsistent declaration.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

class SingularFormError : public Error {
 public:
  using Error::Error;
};

class VariantError : public Error {
 public:
  using Error::Error;
};

class InvalidConstants : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class SamplingExhausted : public Error {
 public:
  using Error::Error;
};

class IllConditioned : public Error {
 public:
  explicit IllConditioned(double condition)
      : Error("sample Gram matrix is ill-conditioned (condition number " +
              std::to_string(condition) + ")"),
        condition_(condition) {}
  double condition() const { return condition_; }

 private:
  double condition_;
};

class GuardExit : public Error {
 public:
  explicit GuardExit(double t)
      : Error("trajectory left the guarded domain at t=" + std::to_string(t)),
        t_(t) {}
  double time() const { return t_; }

 private:
  double t_;
};

class NonFinite : public Error {
 public:
  explicit NonFinite(double t)
      : Error("trajectory became non-finite at t=" + std::to_string(t)),
        t_(t) {}
  double time() const { return t_; }

 private:
  double t_;
};

class UnknownMonitor : public Error {
 public:
  explicit UnknownMonitor(const std::string& name)
      : Error("unknown monitor '" + name + "'") {}
};

class RankError : public Error {
 public:
  using Error::Error;
};

/// The characteristic distributions of two Poisson structures differ, so no
/// recursion operator links them.
class DistributionsDiffer : public Error {
 public:
  explicit DistributionsDiffer(std::vector<double> principal_angles);
  const std::vector<double>& principal_angles() const { return angles_; }

 private:
  std::vector<double> angles_;
};

class SingularRestriction : public Error {
 public:
  using Error::Error;
};

}  // namespace poissonkit
