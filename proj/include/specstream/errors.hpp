#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace specstream {

// Malformed arguments or configuration: dimension mismatches, invalid
// simplex weights, bad experiment specs.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Unreadable or unwritable files.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numerical failures surfaced to the caller: non-convergence, rank
// deficiency, degenerate decompositions.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConvergenceError : public NumericalError {
public:
    ConvergenceError(const std::string& what, double residual)
        : NumericalError(what), residual_(residual) {}

    double residual() const { return residual_; }

private:
    double residual_;
};

// Fewer usable eigenvalues than requested; carries how many were usable so
// the online loop can fall back to a lower rank.
class RankDeficiencyError : public NumericalError {
public:
    RankDeficiencyError(const std::string& what, std::size_t usable_rank)
        : NumericalError(what), usable_rank_(usable_rank) {}

    std::size_t usable_rank() const { return usable_rank_; }

private:
    std::size_t usable_rank_;
};

// A recovered topic collapsed to an all-zero column after clamping.
class DegenerateRecoveryError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace specstream
