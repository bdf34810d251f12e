#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "specstream/linalg.hpp"
#include "specstream/params.hpp"
#include "specstream/rng.hpp"
#include "specstream/tensor.hpp"

namespace specstream {

struct ReservoirDelta {
    bool inserted = false;
    std::optional<OneHotTriple> evicted;
};

// Fixed-capacity uniform sample of past stream elements. The update rule is
// the acceptance test of the online algorithm: draw a in [0,1], keep the
// first m arrivals unconditionally, afterwards accept arrival t iff
// a <= m / (t-1), evicting a uniformly random held item.
class Reservoir {
public:
    Reservoir(std::size_t capacity, std::uint64_t seed);

    ReservoirDelta update(const OneHotTriple& x);

    std::span<const OneHotTriple> items() const { return items_; }
    // 1-based stream positions of the held items, aligned with items()
    std::span<const std::uint64_t> indices() const { return indices_; }
    std::size_t capacity() const { return capacity_; }
    std::uint64_t seen() const { return seen_; }
    std::size_t size() const { return items_.size(); }

private:
    std::size_t capacity_;
    std::uint64_t seen_ = 0;
    std::vector<OneHotTriple> items_;
    std::vector<std::uint64_t> indices_;
    Xoshiro256pp rng_;
};

// M2 = 1/(6|S|) * sum over samples of the six ordered distinct-slot word
// pairs. Symmetric by construction; entries sum to 1.
SymMatrix empirical_m2(std::span<const OneHotTriple> samples, std::size_t d);

// T = 1/(6|S|) * sum over samples of the six slot orderings of the whitened
// words (w^T e_w is a row lookup). Output is K x K x K.
SymTensor3 empirical_whitened_t3(std::span<const OneHotTriple> samples, const Whitener& wh);

// Weighted variant: sample z contributes with weight weights[z] and the
// normalizer is 6 * sum(weights). Feeding every possible triple weighted by
// its exact probability reproduces the exact whitened tensor.
SymTensor3 empirical_whitened_t3(std::span<const OneHotTriple> samples,
                                 std::span<const double> weights, const Whitener& wh);

// Exact contraction of a dense tensor onto the whitened basis:
// out(a,b,c) = sum_{ijk} T(i,j,k) w(i,a) w(j,b) w(k,c).
SymTensor3 whiten_tensor(const SymTensor3& t, const Whitener& wh);

// A known model plus a per-step topic prior: the exact word-triple
// distribution at step t is P_t(i,j,k) = sum_c prior_t(c) u_c(i) u_c(j) u_c(k).
struct ExactModel {
    TopicParams params;
    std::function<Vector(std::uint64_t)> prior_at;  // t is 1-based

    static ExactModel stationary(TopicParams p);
    // Deterministic repeating schedule: counts[c] consecutive steps of topic
    // c per batch; the per-step prior is a point mass.
    static ExactModel scheduled(TopicParams p, std::vector<std::size_t> counts);

    // Mean of prior_at(1..n)
    Vector average_prior(std::uint64_t n) const;
};

// Step-averaged exact moments over t = 1..n:
//   M2 = sum_c avg_prior(c) u_c u_c^T,   M3 = sum_c avg_prior(c) u_c^(x3).
// exact_m3 materializes d^3 entries and is limited to test scale (d <= 32).
SymMatrix exact_m2(const ExactModel& model, std::uint64_t n);
SymTensor3 exact_m3(const ExactModel& model, std::uint64_t n);

}  // namespace specstream
