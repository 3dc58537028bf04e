#pragma once

#include <stdexcept>
#include <string>

namespace qcw {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// circuit / parser
struct SyntaxError : Error { using Error::Error; };
struct QubitOutOfRange : Error { using Error::Error; };
struct DuplicateOperand : Error { using Error::Error; };
struct UnsupportedGate : Error { using Error::Error; };
struct TooManyQubits : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };

// codec / latent
struct ShapeMismatch : Error { using Error::Error; };
struct NonFiniteValue : Error { using Error::Error; };

// watermark
struct LengthMismatch : Error { using Error::Error; };
struct IndivisibleCapacity : Error { using Error::Error; };
struct InvalidAlpha : Error { using Error::Error; };

// attacks
struct InsufficientTargets : Error { using Error::Error; };

// detection / harness
struct ConfigError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

} // namespace qcw
