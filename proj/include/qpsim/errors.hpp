#pragma once

#include <stdexcept>
#include <string>

namespace qpsim {

// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Matrix shape or mode-count mismatch.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A value outside the domain the model accepts (wavelength out of band,
// voltage beyond compliance, positive loopback dB, ...).
class RangeError : public Error {
 public:
  using Error::Error;
};

// Bad call arguments that are not a range violation (empty index sets,
// incomplete assignments, k == l input pairs).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Distributions compared over different outcome sets.
class LabelError : public Error {
 public:
  using Error::Error;
};

// Distribution expected to be normalized but is not.
class NormalizationError : public Error {
 public:
  using Error::Error;
};

// Sample rate too low for the filter being simulated.
class AliasingError : public RangeError {
 public:
  using RangeError::RangeError;
};

// Mesh cell acting on non-adjacent modes, or a malformed mesh.
class TopologyError : public Error {
 public:
  using Error::Error;
};

// Input failed a structural precondition (e.g. not unitary).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Reconstruction data is missing inputs or input pairs.
class CoverageError : public Error {
 public:
  using Error::Error;
};

// Pulse program does not cover the requested photon frames.
class TimingError : public Error {
 public:
  using Error::Error;
};

// Least-squares fit could not be set up or is degenerate.
class FitError : public Error {
 public:
  using Error::Error;
};

// Malformed file contents.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace qpsim
