#include "specstream/moments.hpp"

#include <cmath>
#include <utility>

namespace specstream {

Reservoir::Reservoir(std::size_t capacity, std::uint64_t seed)
    : capacity_(capacity), rng_(seed) {
    if (capacity == 0) throw InputError("Reservoir: capacity must be >= 1");
    items_.reserve(capacity);
    indices_.reserve(capacity);
}

ReservoirDelta Reservoir::update(const OneHotTriple& x) {
    const std::uint64_t t = seen_ + 1;
    const double a = rng_.next_double();
    ReservoirDelta delta;
    if (t <= capacity_) {
        items_.push_back(x);
        indices_.push_back(t);
        delta.inserted = true;
    } else if (a <= static_cast<double>(capacity_) / static_cast<double>(t - 1)) {
        const std::size_t victim = rng_.next_below(capacity_);
        delta.inserted = true;
        delta.evicted = items_[victim];
        items_[victim] = x;
        indices_[victim] = t;
    }
    seen_ = t;
    return delta;
}

SymMatrix empirical_m2(std::span<const OneHotTriple> samples, std::size_t d) {
    if (samples.empty()) throw InputError("empirical_m2: empty sample set");
    SymMatrix m2 = SymMatrix::zeros(d);
    const double s = 1.0 / (6.0 * static_cast<double>(samples.size()));
    for (const OneHotTriple& x : samples) m2.accumulate_pairs(x, s);
    return m2;
}

SymTensor3 empirical_whitened_t3(std::span<const OneHotTriple> samples, const Whitener& wh) {
    if (samples.empty()) throw InputError("empirical_whitened_t3: empty sample set");
    SymTensor3 t = SymTensor3::zeros(wh.rank());
    const double s = 1.0 / (6.0 * static_cast<double>(samples.size()));
    for (const OneHotTriple& x : samples) {
        if (x.d != wh.vocab_dim())
            throw InputError("empirical_whitened_t3: sample dimension mismatch");
        t.add_rank1_sym(wh.whitened_word(x.w1), wh.whitened_word(x.w2),
                        wh.whitened_word(x.w3), s);
    }
    return t;
}

SymTensor3 empirical_whitened_t3(std::span<const OneHotTriple> samples,
                                 std::span<const double> weights, const Whitener& wh) {
    if (samples.empty()) throw InputError("empirical_whitened_t3: empty sample set");
    if (samples.size() != weights.size())
        throw InputError("empirical_whitened_t3: weight count mismatch");
    double total = 0.0;
    for (double w : weights) total += w;
    if (total <= 0.0) throw InputError("empirical_whitened_t3: weights sum to zero");
    SymTensor3 t = SymTensor3::zeros(wh.rank());
    const double norm = 1.0 / (6.0 * total);
    for (std::size_t z = 0; z < samples.size(); ++z) {
        const OneHotTriple& x = samples[z];
        if (x.d != wh.vocab_dim())
            throw InputError("empirical_whitened_t3: sample dimension mismatch");
        if (weights[z] == 0.0) continue;
        t.add_rank1_sym(wh.whitened_word(x.w1), wh.whitened_word(x.w2),
                        wh.whitened_word(x.w3), weights[z] * norm);
    }
    return t;
}

SymTensor3 whiten_tensor(const SymTensor3& t, const Whitener& wh) {
    const std::size_t d = t.dim();
    const std::size_t k = wh.rank();
    if (d != wh.vocab_dim()) throw InputError("whiten_tensor: dimension mismatch");
    SymTensor3 out = SymTensor3::zeros(k);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            for (std::size_t l = 0; l < d; ++l) {
                const double v = t(i, j, l);
                if (v == 0.0) continue;
                out.add_rank1(wh.whitened_word(i), wh.whitened_word(j),
                              wh.whitened_word(l), v);
            }
    return out;
}

ExactModel ExactModel::stationary(TopicParams p) {
    ExactModel m;
    Vector omega = p.omega;
    m.params = std::move(p);
    m.prior_at = [omega = std::move(omega)](std::uint64_t) { return omega; };
    return m;
}

ExactModel ExactModel::scheduled(TopicParams p, std::vector<std::size_t> counts) {
    if (counts.size() != p.k())
        throw InputError("ExactModel::scheduled: counts length must equal k");
    std::size_t batch = 0;
    for (std::size_t c : counts) batch += c;
    if (batch == 0) throw InputError("ExactModel::scheduled: empty schedule");
    const std::size_t k = p.k();
    ExactModel m;
    m.params = std::move(p);
    m.prior_at = [counts = std::move(counts), batch, k](std::uint64_t t) {
        std::size_t pos = static_cast<std::size_t>((t - 1) % batch);
        Vector prior(k, 0.0);
        for (std::size_t c = 0; c < k; ++c) {
            if (pos < counts[c]) {
                prior[c] = 1.0;
                break;
            }
            pos -= counts[c];
        }
        return prior;
    };
    return m;
}

Vector ExactModel::average_prior(std::uint64_t n) const {
    if (n == 0) throw InputError("ExactModel::average_prior: n must be >= 1");
    Vector sum(params.k(), 0.0);
    for (std::uint64_t t = 1; t <= n; ++t) {
        const Vector p = prior_at(t);
        for (std::size_t c = 0; c < sum.size(); ++c) sum[c] += p[c];
    }
    for (double& v : sum) v /= static_cast<double>(n);
    return sum;
}

SymMatrix exact_m2(const ExactModel& model, std::uint64_t n) {
    const Vector avg = model.average_prior(n);
    SymMatrix m2 = SymMatrix::zeros(model.params.d());
    for (std::size_t c = 0; c < model.params.k(); ++c)
        m2.add_outer_self(model.params.u.column(c), avg[c]);
    return m2;
}

SymTensor3 exact_m3(const ExactModel& model, std::uint64_t n) {
    const Vector avg = model.average_prior(n);
    SymTensor3 m3 = SymTensor3::zeros(model.params.d());
    for (std::size_t c = 0; c < model.params.k(); ++c)
        m3.add_cube(model.params.u.column(c), avg[c]);
    return m3;
}

}  // namespace specstream
