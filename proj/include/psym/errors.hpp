#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace psym {

// Invalid argument of a math primitive (division by zero, log of a
// non-positive value). When raised while recording on a tape, `node`
// is the index the offending node would have received.
class DomainError : public std::runtime_error {
 public:
  static constexpr std::size_t no_node = static_cast<std::size_t>(-1);

  explicit DomainError(const std::string& what, std::size_t node_index = no_node)
      : std::runtime_error(what), node_(node_index) {}

  std::size_t node() const { return node_; }

 private:
  std::size_t node_;
};

// Fixed-point or optimizer iteration failed to reach its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}

  double residual() const { return residual_; }

 private:
  double residual_;
};

// All measured errors sit below the measurement noise floor, so no
// order can be fitted; the caller should enlarge the step sizes.
class NoiseFloorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Training aborted on a non-finite loss.
class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(const std::string& what, int epoch, double last_finite_loss)
      : std::runtime_error(what), epoch_(epoch), last_finite_(last_finite_loss) {}

  int epoch() const { return epoch_; }
  double last_finite_loss() const { return last_finite_; }

 private:
  int epoch_;
  double last_finite_;
};

}  // namespace psym
