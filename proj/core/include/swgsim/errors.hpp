#pragma once

#include <stdexcept>
#include <string>

namespace swg {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Vector/grid dimensions do not line up.
struct ShapeError : Error {
    using Error::Error;
};

// A denoiser was asked to evaluate at sigma <= 0.
struct InvalidNoiseLevelError : Error {
    using Error::Error;
};

// A conditional denoiser was invoked without a class id.
struct MissingConditionError : Error {
    using Error::Error;
};

// ||eps_pos - eps_neg|| too small for the optimal-weight ratio.
struct DegenerateDirectionError : Error {
    using Error::Error;
};

// Guidance rules cannot be merged (different positives, masks or intervals).
struct IncompatibleRuleError : Error {
    using Error::Error;
};

// A denoiser cannot process the requested crop size.
struct IncompatibleDenoiserError : Error {
    using Error::Error;
};

// A metric has no defined value (e.g. no stable trajectories).
struct UndefinedMetricError : Error {
    using Error::Error;
};

// Config, schedule or window-plan validation failure.
struct ValidationError : Error {
    using Error::Error;
};

// File read/write failure.
struct IoError : Error {
    using Error::Error;
};

}  // namespace swg
