#pragma once

#include <stdexcept>
#include <string>

namespace stripbloch {

// Bad configs / malformed inputs.  CLI exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem trouble (missing file, unwritable dir).  CLI exit code 1.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A numerical contract was violated at runtime.  CLI exit code 3.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// (E,k) landed within eps_thr of a threshold curve; the decaying subspaces
// change rank there and no convention is assigned.
struct ThresholdProximity : NumericalError {
    using NumericalError::NumericalError;
};

// All transverse modes elliptic: no decaying subspace, nothing to scan.
struct EmptyMinusSubspace : NumericalError {
    using NumericalError::NumericalError;
};

// Too much mass near a box edge (or wrap seam); measurements would be lies.
struct BoundaryContamination : NumericalError {
    using NumericalError::NumericalError;
};

struct InsufficientSamples : NumericalError {
    using NumericalError::NumericalError;
};

} // namespace stripbloch
