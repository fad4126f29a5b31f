#pragma once

#include <stdexcept>
#include <string>

namespace embedgeom {

/// Base of every error raised by the library. `name()` is the stable
/// identifier printed by the CLI on failure.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* name() const noexcept = 0;
};

#define EMBEDGEOM_DEFINE_ERROR(Type)                                        \
    class Type : public Error {                                             \
    public:                                                                 \
        using Error::Error;                                                 \
        const char* name() const noexcept override { return #Type; }        \
    };

/// Malformed header or unparseable file content.
EMBEDGEOM_DEFINE_ERROR(FormatError)
/// Two pieces of data that must agree (row counts, sizes) do not.
EMBEDGEOM_DEFINE_ERROR(ConsistencyError)
/// Values violate a data invariant (non-finite, zero rows, bad frequency).
EMBEDGEOM_DEFINE_ERROR(DataError)
EMBEDGEOM_DEFINE_ERROR(IoError)
/// Input is well-formed but mathematically degenerate for the operation.
EMBEDGEOM_DEFINE_ERROR(DegenerateInput)
/// Not enough samples, rows, bins or pairs for the operation.
EMBEDGEOM_DEFINE_ERROR(InsufficientData)

#undef EMBEDGEOM_DEFINE_ERROR

}  // namespace embedgeom
