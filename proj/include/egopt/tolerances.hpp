#pragma once

// Central numerical policy. Every tolerance/threshold used by the library
// lives here so the numerics can be audited in one place.

namespace egopt::tol {

// Matrix construction / factorization
inline constexpr double kSymmetryAbs = 1e-12;       // max |A - A^T| accepted as symmetric
inline constexpr double kCholReconstructRel = 1e-8; // L*L^T must match input to this rel. error
inline constexpr double kJitterInitial = 1e-10;     // first diagonal rescue after a failed factorization
inline constexpr double kJitterGrowth = 10.0;
inline constexpr double kJitterMax = 1e-6;          // give up beyond this

// Special functions
inline constexpr double kErfAbs = 1e-12;
inline constexpr double kIncBetaAbs = 1e-10;
inline constexpr int kIncBetaMaxIter = 400;

// Kernel hyperparameter hard ranges
inline constexpr double kThetaMin = 1e-6;
inline constexpr double kThetaMax = 1e6;
inline constexpr double kNuggetMin = 1e-10;
inline constexpr double kNuggetMax = 1e2;

// Posterior sanitation
inline constexpr double kCovSymmetryAbs = 1e-10;
inline constexpr double kVarClampFloor = 0.0;       // negative predictive variances clamp here

// Parameter transforms
inline constexpr double kRoundTripAbs = 1e-9;

// Proposal batches
inline constexpr double kMinPointSeparation = 1e-9;

// Linear models
inline constexpr double kExactFitRel = 1e-12;       // residual SS below this fraction of total => exact fit

}  // namespace egopt::tol
