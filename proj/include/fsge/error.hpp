#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fsge {

// Base for every failure the library reports. `kind` is a stable
// machine-readable tag used in CLI error records.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

private:
  std::string kind_;
};

class InvalidParameter : public Error {
public:
  InvalidParameter(const std::string& field, const std::string& msg)
      : Error("invalid_parameter", field + ": " + msg), field_(field) {}
  const std::string& field() const { return field_; }

private:
  std::string field_;
};

class OutOfRange : public Error {
public:
  explicit OutOfRange(const std::string& msg) : Error("out_of_range", msg) {}
};

class DegenerateGeometry : public Error {
public:
  explicit DegenerateGeometry(const std::string& msg) : Error("degenerate_geometry", msg) {}
};

// Iterative solver gave up. `history` carries residual norms, oldest first.
class ConvergenceFailure : public Error {
public:
  ConvergenceFailure(std::string kind, const std::string& msg, std::vector<double> history = {})
      : Error(std::move(kind), msg), history_(std::move(history)) {}
  const std::vector<double>& history() const { return history_; }

private:
  std::vector<double> history_;
};

}  // namespace fsge
