#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "specstream/moments.hpp"
#include "specstream/params.hpp"

namespace specstream {

struct PowerMethodConfig {
    std::size_t restarts = 50;    // random unit starts per factor
    std::size_t iterations = 100; // fixed-point iterations per start
    double tol = 1e-10;           // stop when ||v_new - v_old|| < tol

    void validate() const {
        if (restarts == 0 || iterations == 0 || tol <= 0.0)
            throw InputError("PowerMethodConfig: all settings must be positive");
    }
};

// Robust eigenpairs of a symmetric order-3 tensor, lambdas descending.
struct SpectralFactors {
    Vector lambdas;
    std::vector<Vector> vs;

    std::size_t count() const { return lambdas.size(); }
};

// Raised when an extracted eigenvalue is non-positive; carries the factors
// recovered up to that point so callers can degrade gracefully.
class DegenerateDecompositionError : public NumericalError {
public:
    DegenerateDecompositionError(const std::string& what, SpectralFactors partial)
        : NumericalError(what), partial_(std::move(partial)) {}

    const SpectralFactors& partial() const { return partial_; }

private:
    SpectralFactors partial_;
};

// Extracts k (lambda, v) pairs by repeated power iteration with deflation:
// per factor, the best of `restarts` random starts (by T(v,v,v), lowest
// start index wins ties) is polished with another `iterations` rounds, then
// T <- T - lambda v^(x3).
SpectralFactors tensor_power_method(const SymTensor3& t, std::size_t k,
                                    const PowerMethodConfig& cfg, Xoshiro256pp& rng);

// omega_i = 1 / lambda_i^2 and u_i = lambda_i (w^T)^+ v_i, before any
// sanitization. Exposed so the algebraic identities can be checked directly.
std::pair<Vector, Matrix> recover_params_raw(const SpectralFactors& f, const Whitener& wh);

// Sanitized recovery: negative entries clamped to zero, omega and each u
// column renormalized to its simplex, topics sorted by descending omega.
// A column that clamps to all zeros raises DegenerateRecoveryError.
TopicParams recover_params(const SpectralFactors& f, const Whitener& wh);

// What the online step had to fall back on, if anything.
struct StepDiagnostics {
    bool warmup = false;
    std::size_t requested_rank = 0;  // K
    std::size_t whitened_rank = 0;   // usable rank actually whitened
    std::size_t factors_recovered = 0;
    bool degenerate_recovery = false;

    bool any_fallback() const;
    // compact code for the CSV trace: "", "warmup", "rank2", "power1",
    // "recovery", joined with '+' when several apply
    std::string fallback_code() const;
};

struct SpectralConfig {
    std::size_t reservoir_capacity = 10000;
    PowerMethodConfig pm;
    bool incremental_m2 = false;  // maintain pair counts on reservoir swaps
};

// The online learner: at each arrival it recomputes moments from the
// reservoir, whitens, decomposes, recovers parameters, and only then admits
// the new observation into the reservoir. The returned parameters are thus
// learned from the first t-1 observations. Degenerate data never throws;
// the step falls back (uniform warm-up, reduced whitening rank, partial
// factors) and reports what happened in the diagnostics.
class SpectralLeader {
public:
    SpectralLeader(std::size_t d, std::size_t k, SpectralConfig cfg, std::uint64_t seed);

    std::pair<TopicParams, StepDiagnostics> step(const OneHotTriple& x);

    const Reservoir& reservoir() const { return reservoir_; }
    std::size_t d() const { return d_; }
    std::size_t k() const { return k_; }

    // Seed of the power-method generator used at step t (1-based); exposed
    // so offline recomputation can replay a step exactly.
    static std::uint64_t pm_seed_for_step(std::uint64_t base_seed, std::uint64_t t);

private:
    SymMatrix scaled_pair_counts() const;

    std::size_t d_;
    std::size_t k_;
    SpectralConfig cfg_;
    std::uint64_t pm_base_seed_;
    Reservoir reservoir_;
    SymMatrix pair_counts_;  // raw counts when incremental_m2 is on
};

// One-shot recovery over a full dataset; errors surface instead of falling
// back. Used for the best-in-hindsight reference on corpora.
TopicParams offline_recover(std::span<const OneHotTriple> samples, std::size_t d,
                            std::size_t k, const PowerMethodConfig& cfg,
                            std::uint64_t seed);

}  // namespace specstream
