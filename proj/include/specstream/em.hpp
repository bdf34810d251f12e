#pragma once

#include <cstdint>

#include "specstream/params.hpp"
#include "specstream/rng.hpp"

namespace specstream {

// Posterior over topics for one document: q(c) ~ omega_c * prod_l u_c(w_l),
// normalized; uniform if every topic has zero mass on the document.
Vector posterior(const TopicParams& params, const OneHotTriple& x);

struct EmConfig {
    double alpha = 0.7;        // step-size reduction power, in [0.5, 1]
    std::size_t minibatch = 1; // documents per sufficient-statistics update
};

// Stepwise EM for the single-topic mixture. Sufficient statistics are kept
// on probability scale and blended as s <- (1-eta_k) s + eta_k s_batch with
// eta_k = (k+2)^(-alpha), so the step size fully controls forgetting. The
// +2 offset keeps the very first update from wiping the initialization.
class StepwiseEm {
public:
    StepwiseEm(std::size_t k, std::size_t d, EmConfig cfg, std::uint64_t seed);

    // Buffer x; once `minibatch` documents are pending, fold their expected
    // counts into the statistics. Returns params() after the update.
    TopicParams step(const OneHotTriple& x);

    // Current parameters: statistics smoothed by delta = 1e-8 and normalized.
    TopicParams params() const;

    double step_size(std::size_t update_index) const;  // eta_k = (k+2)^(-alpha)

    std::size_t update_count() const { return update_count_; }
    const Vector& stat_omega() const { return stat_omega_; }
    const Matrix& stat_u() const { return stat_u_; }
    std::size_t pending_count() const { return pending_.size(); }

    static constexpr double kSmoothing = 1e-8;

private:
    void flush_batch();

    std::size_t k_;
    std::size_t d_;
    EmConfig cfg_;
    std::size_t update_count_ = 0;
    Vector stat_omega_;  // length K, nonnegative, sums to 1
    Matrix stat_u_;      // d x K, nonnegative, sums to 1 overall
    std::vector<OneHotTriple> pending_;
};

}  // namespace specstream
