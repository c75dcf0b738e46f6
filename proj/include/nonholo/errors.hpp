#pragma once

#include <stdexcept>
#include <string>

namespace nonholo {

/// Base class for runtime failures of the numerical engine (exit class 3).
struct EngineError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// NaN/Inf produced by a callback or an integration stage.
struct NumericalError : EngineError {
  using EngineError::EngineError;
};

/// S(q) lost row rank, or S A^{-1} S^T could not be factorized.
struct ConstraintDegeneracyError : EngineError {
  using EngineError::EngineError;
};

/// Kinetic metric A(q) is not positive definite.
struct MetricError : EngineError {
  using EngineError::EngineError;
};

/// Adaptive step size underflowed h_min.
struct StiffnessError : EngineError {
  using EngineError::EngineError;
};

/// Orientation-reversing matrix where a rotation was required.
struct OrientationError : EngineError {
  using EngineError::EngineError;
};

/// A model-level linear operator (multiplier matrix, momentum inversion)
/// is singular at the queried state.
struct DegeneracyError : EngineError {
  using EngineError::EngineError;
};

/// Query too close to a coordinate-chart singularity.
struct ChartSingularityError : EngineError {
  using EngineError::EngineError;
};

/// Invalid scenario/configuration input (exit class 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace nonholo
