#ifndef TDDP_TYPES_HPP
#define TDDP_TYPES_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace tddp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : SolverError {
  using SolverError::SolverError;
};
struct SingularSystem : SolverError {
  using SolverError::SolverError;
};
struct SingularSchur : SolverError {
  using SolverError::SolverError;
};
struct NotPositiveDefinite : SolverError {
  explicit NotPositiveDefinite(const std::string& what, int stage = -1)
      : SolverError(what), stage(stage) {}
  int stage;
};
struct SingularConstraintBlock : SolverError {
  explicit SingularConstraintBlock(const std::string& what, int stage = -1)
      : SolverError(what), stage(stage) {}
  int stage;
};
struct InconsistentConstraint : SolverError {
  using SolverError::SolverError;
};
struct SingularEndpointOperator : SolverError {
  using SolverError::SolverError;
};
struct InconsistentEndpoint : SolverError {
  using SolverError::SolverError;
};
struct StaleFactorization : SolverError {
  using SolverError::SolverError;
};
struct CallbackFailure : SolverError {
  explicit CallbackFailure(const std::string& what, int stage = -1)
      : SolverError(what), stage(stage) {}
  int stage;
};
struct UnknownFamily : SolverError {
  using SolverError::SolverError;
};
struct NonFiniteState : SolverError {
  using SolverError::SolverError;
};
struct RegularizationSaturated : SolverError {
  using SolverError::SolverError;
};

// Global count of matrix factorizations performed by the Riccati passes.
// The endpoint-dependent sweep must not add to it (reuse contract).
struct FactorizationCounter {
  static long& count() {
    static long c = 0;
    return c;
  }
  static void bump() { ++count(); }
};

inline double default_rank_tol(Eigen::Index rows, Eigen::Index cols) {
  return static_cast<double>(std::max(rows, cols)) *
         std::numeric_limits<double>::epsilon();
}

}  // namespace tddp

#endif
