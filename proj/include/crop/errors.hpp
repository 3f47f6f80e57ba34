#pragma once

#include <stdexcept>
#include <string>

namespace crop {

// Every failure surfaced by the library derives from crop::Error so callers
// (the CLI in particular) can catch one type and map it to an exit code.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonUniqueBestArm : Error {
    using Error::Error;
};

struct ValidationError : Error {
    using Error::Error;
};

struct BadParams : Error {
    using Error::Error;
};

struct ParseError : Error {
    using Error::Error;
};

struct NumericalFailure : Error {
    using Error::Error;
};

struct DimensionTooLarge : Error {
    using Error::Error;
};

struct EmptyAllocation : Error {
    using Error::Error;
};

struct InvalidBernoulliMean : Error {
    using Error::Error;
};

}  // namespace crop
