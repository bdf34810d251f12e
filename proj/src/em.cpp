#include "specstream/em.hpp"

#include <cmath>

namespace specstream {

Vector posterior(const TopicParams& params, const OneHotTriple& x) {
    if (x.d != params.d()) throw InputError("posterior: dimension mismatch");
    const std::size_t k = params.k();
    Vector q(k);
    double total = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        q[c] = params.omega[c] * params.u(x.w1, c) * params.u(x.w2, c) * params.u(x.w3, c);
        total += q[c];
    }
    if (total <= 0.0) {
        const double uniform = 1.0 / static_cast<double>(k);
        for (double& v : q) v = uniform;
        return q;
    }
    for (double& v : q) v /= total;
    return q;
}

StepwiseEm::StepwiseEm(std::size_t k, std::size_t d, EmConfig cfg, std::uint64_t seed)
    : k_(k), d_(d), cfg_(cfg) {
    if (k == 0 || d == 0) throw InputError("StepwiseEm: k and d must be >= 1");
    if (cfg.alpha < 0.5 || cfg.alpha > 1.0)
        throw InputError("StepwiseEm: alpha must lie in [0.5, 1]");
    if (cfg.minibatch == 0) throw InputError("StepwiseEm: minibatch must be >= 1");

    // symmetric Dirichlet(1) draws break the topic symmetry of the init
    Xoshiro256pp rng(seed);
    const auto dirichlet = [&rng](std::size_t n) {
        Vector v(n);
        double sum = 0.0;
        for (double& x : v) {
            x = -std::log(1.0 - rng.next_double());
            sum += x;
        }
        for (double& x : v) x /= sum;
        return v;
    };

    stat_omega_ = dirichlet(k_);
    stat_u_ = Matrix(d_, k_);
    for (std::size_t c = 0; c < k_; ++c) {
        const Vector col = dirichlet(d_);
        for (std::size_t i = 0; i < d_; ++i) stat_u_(i, c) = col[i] * stat_omega_[c];
    }
    pending_.reserve(cfg_.minibatch);
}

double StepwiseEm::step_size(std::size_t update_index) const {
    return std::pow(static_cast<double>(update_index) + 2.0, -cfg_.alpha);
}

void StepwiseEm::flush_batch() {
    const TopicParams cur = params();
    const double batch = static_cast<double>(pending_.size());

    Vector batch_omega(k_, 0.0);
    Matrix batch_u(d_, k_);
    for (const OneHotTriple& x : pending_) {
        const Vector q = posterior(cur, x);
        for (std::size_t c = 0; c < k_; ++c) {
            batch_omega[c] += q[c] / batch;
            const double w = q[c] / (3.0 * batch);
            batch_u(x.w1, c) += w;
            batch_u(x.w2, c) += w;
            batch_u(x.w3, c) += w;
        }
    }

    const double eta = step_size(update_count_);
    for (std::size_t c = 0; c < k_; ++c) {
        stat_omega_[c] = (1.0 - eta) * stat_omega_[c] + eta * batch_omega[c];
        for (std::size_t i = 0; i < d_; ++i)
            stat_u_(i, c) = (1.0 - eta) * stat_u_(i, c) + eta * batch_u(i, c);
    }
    ++update_count_;
    pending_.clear();
}

TopicParams StepwiseEm::step(const OneHotTriple& x) {
    if (x.d != d_) throw InputError("StepwiseEm::step: dimension mismatch");
    pending_.push_back(x);
    if (pending_.size() == cfg_.minibatch) flush_batch();
    return params();
}

TopicParams StepwiseEm::params() const {
    TopicParams p;
    p.omega.assign(k_, 0.0);
    p.u = Matrix(d_, k_);

    double omega_sum = 0.0;
    for (std::size_t c = 0; c < k_; ++c) {
        p.omega[c] = stat_omega_[c] + kSmoothing;
        omega_sum += p.omega[c];
    }
    for (double& w : p.omega) w /= omega_sum;

    for (std::size_t c = 0; c < k_; ++c) {
        double col_sum = 0.0;
        for (std::size_t i = 0; i < d_; ++i) col_sum += stat_u_(i, c) + kSmoothing;
        for (std::size_t i = 0; i < d_; ++i)
            p.u(i, c) = (stat_u_(i, c) + kSmoothing) / col_sum;
    }
    return p;
}

}  // namespace specstream
