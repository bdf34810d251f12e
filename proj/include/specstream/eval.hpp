#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "specstream/moments.hpp"
#include "specstream/params.hpp"

namespace specstream {

// Per-step record written to the CSV traces. Absent values stay absent
// (empty CSV fields), they are never written as zeros.
struct StepMetrics {
    std::uint64_t t = 0;
    double loss = 0.0;
    double nll = 0.0;
    std::optional<double> recovery_err;
    std::optional<double> cum_regret;
    std::string fallback;
};

// ||M3(params)||_F^2 = sum_{a,b} omega_a omega_b (u_a . u_b)^3. All
// Frobenius quantities over d^3 objects go through this rank-K closed form;
// nothing here materializes a vocabulary-sized tensor.
double tensor_sq_norm(const TopicParams& p);

// M3(params)(i,j,k) = sum_c omega_c u_c(i) u_c(j) u_c(k)
double tensor_entry(const TopicParams& p, std::size_t i, std::size_t j, std::size_t k);

// ||M3(a) - M3(b)||_F^2 via the cross term sum_{a,b} w_a w'_b (u_a . u'_b)^3
double tensor_sq_distance(const TopicParams& a, const TopicParams& b);

// Per-step loss || x (x) x (x) x - M ||_F^2 = ||M||_F^2 - 2 M(x) + 1.
double loss(const TopicParams& m3, const OneHotTriple& x);
// Dense counterpart (test scale); literal sum over all d^3 entries.
double loss(const SymTensor3& m3, const OneHotTriple& x);

// Dense tensor of a rank-K model (test scale, d <= 32).
SymTensor3 dense_tensor(const TopicParams& p);

// Best solution in hindsight for a known model over an n-step horizon: the
// step-averaged topic prior with the stationary word matrix.
TopicParams hindsight_params(const ExactModel& model, std::uint64_t horizon);

// R(t) = sum_{s<=t} (losses_alg[s] - losses_ref[s])
Vector regret_trace(std::span<const double> losses_alg, std::span<const double> losses_ref);

// Negative log-likelihood of one document under delta-smoothed parameters.
double doc_nll(const TopicParams& p, const OneHotTriple& x, double delta = 1e-8);

// Average predictive metrics over a horizon of n = docs.size() steps, with
// trace[t-1] the parameters that predicted docs[t-1] (learned from the
// first t-1 documents). Both sums skip t = 1 and divide by n.
double nll_metric(std::span<const TopicParams> trace, std::span<const OneHotTriple> docs,
                  double delta = 1e-8);
double recovery_metric(std::span<const TopicParams> trace, const TopicParams& reference);

// Streaming form of the two metrics above, so long runs never retain their
// parameter traces.
class MetricAccumulator {
public:
    // t is 1-based; ref may be null when no hindsight reference exists
    void observe(std::uint64_t t, const TopicParams& predicted, const OneHotTriple& x,
                 const TopicParams* ref, double delta = 1e-8);

    double l1() const;  // average NLL up to the last observed step
    double l2() const;  // average recovery error up to the last observed step

private:
    std::uint64_t n_ = 0;
    double nll_sum_ = 0.0;
    double rec_sum_ = 0.0;
    bool has_ref_ = false;
};

}  // namespace specstream
