#include "specstream/eval.hpp"

#include <cmath>

namespace specstream {

namespace {

double cross_term(const TopicParams& a, const TopicParams& b) {
    if (a.d() != b.d()) throw InputError("tensor cross term: dimension mismatch");
    double s = 0.0;
    for (std::size_t p = 0; p < a.k(); ++p) {
        const Vector up = a.u.column(p);
        for (std::size_t q = 0; q < b.k(); ++q) {
            double g = 0.0;
            for (std::size_t i = 0; i < a.d(); ++i) g += up[i] * b.u(i, q);
            s += a.omega[p] * b.omega[q] * g * g * g;
        }
    }
    return s;
}

}  // namespace

double tensor_sq_norm(const TopicParams& p) { return cross_term(p, p); }

double tensor_entry(const TopicParams& p, std::size_t i, std::size_t j, std::size_t k) {
    double s = 0.0;
    for (std::size_t c = 0; c < p.k(); ++c)
        s += p.omega[c] * p.u(i, c) * p.u(j, c) * p.u(k, c);
    return s;
}

double tensor_sq_distance(const TopicParams& a, const TopicParams& b) {
    return tensor_sq_norm(a) + tensor_sq_norm(b) - 2.0 * cross_term(a, b);
}

double loss(const TopicParams& m3, const OneHotTriple& x) {
    if (x.d != m3.d()) throw InputError("loss: dimension mismatch");
    return tensor_sq_norm(m3) - 2.0 * tensor_entry(m3, x.w1, x.w2, x.w3) + 1.0;
}

double loss(const SymTensor3& m3, const OneHotTriple& x) {
    if (x.d != m3.dim()) throw InputError("loss: dimension mismatch");
    const std::size_t d = m3.dim();
    const std::size_t hit = (static_cast<std::size_t>(x.w1) * d + x.w2) * d + x.w3;
    const auto e = m3.entries();
    double s = 0.0;
    for (std::size_t idx = 0; idx < e.size(); ++idx) {
        const double g = (idx == hit ? 1.0 : 0.0) - e[idx];
        s += g * g;
    }
    return s;
}

SymTensor3 dense_tensor(const TopicParams& p) {
    SymTensor3 t = SymTensor3::zeros(p.d());
    for (std::size_t c = 0; c < p.k(); ++c) t.add_cube(p.u.column(c), p.omega[c]);
    return t;
}

TopicParams hindsight_params(const ExactModel& model, std::uint64_t horizon) {
    return TopicParams::checked(model.average_prior(horizon), model.params.u);
}

Vector regret_trace(std::span<const double> losses_alg, std::span<const double> losses_ref) {
    if (losses_alg.size() != losses_ref.size())
        throw InputError("regret_trace: series length mismatch");
    Vector out(losses_alg.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < losses_alg.size(); ++i) {
        acc += losses_alg[i] - losses_ref[i];
        out[i] = acc;
    }
    return out;
}

double doc_nll(const TopicParams& p, const OneHotTriple& x, double delta) {
    if (x.d != p.d()) throw InputError("doc_nll: dimension mismatch");
    const double d = static_cast<double>(p.d());
    const double k = static_cast<double>(p.k());
    double lik = 0.0;
    for (std::size_t c = 0; c < p.k(); ++c) {
        const double w = (p.omega[c] + delta) / (1.0 + k * delta);
        const double u1 = (p.u(x.w1, c) + delta) / (1.0 + d * delta);
        const double u2 = (p.u(x.w2, c) + delta) / (1.0 + d * delta);
        const double u3 = (p.u(x.w3, c) + delta) / (1.0 + d * delta);
        lik += w * u1 * u2 * u3;
    }
    return -std::log(lik);
}

double nll_metric(std::span<const TopicParams> trace, std::span<const OneHotTriple> docs,
                  double delta) {
    if (trace.size() != docs.size()) throw InputError("nll_metric: trace misaligned");
    const std::size_t n = docs.size();
    if (n == 0) throw InputError("nll_metric: empty horizon");
    double s = 0.0;
    for (std::size_t t = 2; t <= n; ++t) s += doc_nll(trace[t - 1], docs[t - 1], delta);
    return s / static_cast<double>(n);
}

double recovery_metric(std::span<const TopicParams> trace, const TopicParams& reference) {
    const std::size_t n = trace.size();
    if (n == 0) throw InputError("recovery_metric: empty horizon");
    double s = 0.0;
    for (std::size_t t = 2; t <= n; ++t)
        s += tensor_sq_distance(trace[t - 1], reference);
    return s / static_cast<double>(n);
}

void MetricAccumulator::observe(std::uint64_t t, const TopicParams& predicted,
                                const OneHotTriple& x, const TopicParams* ref,
                                double delta) {
    if (t != n_ + 1) throw InputError("MetricAccumulator: steps must arrive in order");
    n_ = t;
    if (t < 2) return;
    nll_sum_ += doc_nll(predicted, x, delta);
    if (ref != nullptr) {
        rec_sum_ += tensor_sq_distance(predicted, *ref);
        has_ref_ = true;
    }
}

double MetricAccumulator::l1() const {
    if (n_ == 0) throw InputError("MetricAccumulator: no observations");
    return nll_sum_ / static_cast<double>(n_);
}

double MetricAccumulator::l2() const {
    if (!has_ref_) throw InputError("MetricAccumulator: no hindsight reference");
    return rec_sum_ / static_cast<double>(n_);
}

}  // namespace specstream
