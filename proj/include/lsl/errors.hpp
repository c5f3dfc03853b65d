#pragma once

#include <stdexcept>
#include <string>

namespace lsl {

// Thrown when two distributions do not live on the same sample space.
struct DimensionMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Thrown when an exact computation would exceed its enumeration/memory budget.
struct ResourceLimit : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed serialized input (position-annotated where possible).
struct ParseError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A stated precondition of an operation does not hold for the given arguments.
struct PreconditionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A checked postcondition failed; surfaced loudly rather than reported.
struct PostconditionViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace lsl
