#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cellcount {

// Base class for every error thrown by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// imaging
struct DimensionMismatch : Error { using Error::Error; };
struct EmptyInput : Error { using Error::Error; };
struct InvalidSigma : Error { using Error::Error; };

// PGM I/O
struct MalformedHeader : Error { using Error::Error; };
struct UnsupportedMaxval : Error { using Error::Error; };
struct TruncatedPixelData : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

// dataset generation
struct CapacityExceeded : Error { using Error::Error; };
struct UnknownCount : Error { using Error::Error; };

// formula grammar
struct SyntaxError : Error { using Error::Error; };
struct SumMismatch : Error { using Error::Error; };
struct DuplicateBasis : Error { using Error::Error; };

// augmentation
struct InsufficientDonors : Error { using Error::Error; };
struct MixedGroup : Error { using Error::Error; };
struct MissingPool : Error { using Error::Error; };

// predictors
struct DegenerateLabels : Error { using Error::Error; };
struct SingularSystem : Error { using Error::Error; };

// ensemble
struct TooFewCounts : Error { using Error::Error; };
struct DegenerateIntensities : Error { using Error::Error; };
struct GroupMismatch : Error { using Error::Error; };

// metrics / harness
struct EmptyRecords : Error { using Error::Error; };
struct MissingFormulae : Error { using Error::Error; };

// Dataset validation failure; carries the individual violations.
struct ValidationFailure : Error {
    ValidationFailure(const std::string& msg, std::vector<std::string> v)
        : Error(msg), violations(std::move(v)) {}
    std::vector<std::string> violations;
};

}  // namespace cellcount
