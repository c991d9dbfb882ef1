#pragma once

#include <stdexcept>
#include <string>

namespace scc {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// model
struct NonMonotoneErasures : Error { using Error::Error; };
struct TooFewFiles : Error { using Error::Error; };
struct DegenerateErasure : Error { using Error::Error; };

// combinatorics
struct IndexOutOfRange : Error { using Error::Error; };
struct NotASubset : Error { using Error::Error; };

// rates
struct InvalidIndex : Error { using Error::Error; };
struct NegativeFactor : Error { using Error::Error; };
struct IntractableSize : Error { using Error::Error; };

// codec
struct PieceTooSmall : Error { using Error::Error; };
struct AllocationOverflow : Error { using Error::Error; };

} // namespace scc
