#pragma once

#include <stdexcept>
#include <string>

namespace polyelast {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid mesh input: degenerate, duplicate or non-manifold cells.
class MeshError : public Error {
 public:
  using Error::Error;
};

/// A grid generator produced an invalid mesh (e.g. inverted cells).
class GenerationError : public Error {
 public:
  using Error::Error;
};

/// Out-of-range physical or numerical parameter.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Failure while building element matrices or global systems.
class AssemblyError : public Error {
 public:
  using Error::Error;
};

/// Linear solver breakdown.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// Raised by SPD solves when a non-positive pivot shows up.
class NotSpdError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Inconsistent constraints in a constrained least-squares problem.
class InfeasibleError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Degenerate geometry of an interaction sub-region.
class LocalGeometryError : public Error {
 public:
  using Error::Error;
};

}  // namespace polyelast
