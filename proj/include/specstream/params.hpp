#pragma once

#include <cstddef>

#include "specstream/tensor.hpp"

namespace specstream {

// Mixture parameters of the single-topic model: a prior on K topics and a
// d x K column-stochastic word-given-topic matrix.
struct TopicParams {
    Vector omega;  // length K, on the simplex
    Matrix u;      // d x K, each column on the d-simplex

    std::size_t k() const { return omega.size(); }
    std::size_t d() const { return u.rows(); }

    static TopicParams uniform(std::size_t k, std::size_t d);

    // Validates the simplex invariants (tolerance 1e-9) and returns the
    // params; use at module boundaries.
    static TopicParams checked(Vector omega, Matrix u);

    // Reorder topics by decreasing prior weight (deterministic reporting
    // order; ties keep their relative order).
    void sort_by_omega_desc();
};

// (x + delta) / normalizer applied to omega and every column of u; used for
// likelihood evaluation so zero-probability words cannot produce infinite
// negative log-likelihood.
TopicParams smoothed(const TopicParams& p, double delta);

}  // namespace specstream
