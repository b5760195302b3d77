#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ahead {

/// Invalid user-supplied configuration (dimensions, parameters, config files).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data (bad labels, unreadable samples).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numeric validation failure (e.g. a matrix that is not doubly stochastic).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Graph is not connected; a mixing matrix would have rho = 1.
class NotConnectedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Random graph generation exhausted its attempt budget.
class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Linear-algebra failure (non-SPD system, failed factorization).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A per-node oracle threw; carries the node index.
class OracleError : public std::runtime_error {
 public:
  OracleError(int node, const std::string& what)
      : std::runtime_error("oracle failure at node " + std::to_string(node) +
                           ": " + what),
        node_(node) {}
  int node() const { return node_; }

 private:
  int node_;
};

/// Iterates left the finite range during a solver run.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::int64_t iteration, double worst_entry)
      : std::runtime_error("divergence at iteration " +
                           std::to_string(iteration) +
                           ", worst entry magnitude " +
                           std::to_string(worst_entry)),
        iteration_(iteration),
        worst_entry_(worst_entry) {}
  std::int64_t iteration() const { return iteration_; }
  double worst_entry() const { return worst_entry_; }

 private:
  std::int64_t iteration_;
  double worst_entry_;
};

/// Filesystem / serialization failure; message carries the path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ahead
