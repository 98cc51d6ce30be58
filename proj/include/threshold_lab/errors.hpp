#pragma once

#include <stdexcept>
#include <string>

namespace thlab {

/// Base class for all errors raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A closure evaluation produced a non-finite value (bad Custom coefficients,
/// or a query far outside the intended box).
struct NonFiniteEval : Error {
    using Error::Error;
};

/// No root of f(u) - u was found in the requested interval.
struct EmptySigma : Error {
    using Error::Error;
};

/// f_u >= 1 somewhere on the certification box; the fixed-point map is not a
/// contraction there.
struct NoContraction : Error {
    using Error::Error;
};

struct MaxIterExceeded : Error {
    using Error::Error;
};

/// The integrand 1/(f(xi)-xi) has a zero inside the integration interval, so
/// the phi factor (and the Riemann invariant) is undefined.
struct SignChange : Error {
    using Error::Error;
};

struct InsufficientSamples : Error {
    using Error::Error;
};

/// The CFL time step collapsed below 1e-14.
struct CflCollapse : Error {
    using Error::Error;
};

/// A grid update produced a non-finite cell value.
struct NonFinite : Error {
    using Error::Error;
};

struct InvalidData : Error {
    using Error::Error;
};

struct HypothesisFailed : Error {
    using Error::Error;
};

/// Configuration file could not be parsed (malformed JSON, unknown family...).
struct ParseError : Error {
    using Error::Error;
};

/// Configuration parsed but violates an invariant (n_cells >= 16, ...).
struct ValidationError : Error {
    using Error::Error;
};

} // namespace thlab
