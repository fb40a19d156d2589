#pragma once

#include <stdexcept>
#include <string>

namespace weakmeter {

// Base type for everything thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A numeric argument left its mathematical domain.
struct DomainError : Error {
    using Error::Error;
};

// A state vector or density matrix failed its invariants.
struct InvalidState : Error {
    using Error::Error;
};

// Post-selection overlap (or probability) too small to condition on.
struct DegeneratePostSelection : Error {
    using Error::Error;
};

// Measurement resolution is numerically zero; conditional values are undefined.
struct ZeroResolution : Error {
    using Error::Error;
};

// Input state carries no polarization component along the axis being estimated.
struct UnpolarizedInput : Error {
    using Error::Error;
};

// A counting run ended with nothing in the cells an estimator needs.
struct NoPostSelectedCounts : Error {
    using Error::Error;
};

// Config text that cannot be parsed; line numbers are 1-based.
struct ParseError : Error {
    ParseError(int line_, const std::string& message)
        : Error("line " + std::to_string(line_) + ": " + message), line(line_) {}
    int line;
};

// A parsed value is outside its allowed range, or a key is unknown.
struct ValidationError : Error {
    using Error::Error;
};

}  // namespace weakmeter
