#ifndef XDFLOW_ERRORS_HPP_
#define XDFLOW_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace xdflow {

/// A non-finite value appeared while evaluating the scheme.
class NonFiniteError : public std::runtime_error {
 public:
  NonFiniteError(const std::string& what, std::size_t cell, std::size_t component)
      : std::runtime_error(what + ": non-finite value in cell " + std::to_string(cell) +
                           ", component " + std::to_string(component + 1)),
        cell_(cell), component_(component) {}
  [[nodiscard]] std::size_t cell() const noexcept { return cell_; }
  [[nodiscard]] std::size_t component() const noexcept { return component_; }

 private:
  std::size_t cell_;
  std::size_t component_;
};

/// Time integration could not continue (halving limit or non-finite state).
class StepFailure : public std::runtime_error {
 public:
  StepFailure(const std::string& what, double time, std::size_t cell, std::size_t component)
      : std::runtime_error(what + " at t=" + std::to_string(time) + " (cell " +
                           std::to_string(cell) + ", component " +
                           std::to_string(component + 1) + ")"),
        time_(time), cell_(cell), component_(component) {}
  [[nodiscard]] double time() const noexcept { return time_; }
  [[nodiscard]] std::size_t cell() const noexcept { return cell_; }
  [[nodiscard]] std::size_t component() const noexcept { return component_; }

 private:
  double time_;
  std::size_t cell_;
  std::size_t component_;
};

}  // namespace xdflow

#endif  // XDFLOW_ERRORS_HPP_
