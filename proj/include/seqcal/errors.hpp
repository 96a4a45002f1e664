#pragma once

#include <stdexcept>
#include <string>

namespace seqcal {

// Argument outside the mathematical domain of an operation (u not in (0,1),
// even n for the median, sample too small for an estimator, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Invalid distribution or sequence parameters.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Requested quantity exists mathematically but is not supported here
// (infinite fourth moment, moment order above 4, even-n median truth).
class UnsupportedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Inconsistent sizes between vectors, matrices or sequence lists.
class DimensionError : public std::length_error {
public:
    using std::length_error::length_error;
};

// Malformed textual input (distribution tokens, calibration files).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace seqcal
