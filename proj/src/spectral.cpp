#include "specstream/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace specstream {

namespace {

std::size_t require_positive_dim(std::size_t d) {
    if (d == 0) throw InputError("SpectralLeader: d and k must be >= 1");
    return d;
}

Vector random_unit(std::size_t dim, Xoshiro256pp& rng) {
    Vector v(dim);
    while (true) {
        for (double& x : v) x = 2.0 * rng.next_double() - 1.0;
        const double n = norm2(v);
        if (n > 1e-3) {
            for (double& x : v) x /= n;
            return v;
        }
    }
}

// v <- T(I,v,v) / ||T(I,v,v)|| until the iterate stops moving. A vanishing
// image means v is (numerically) in the kernel; the vector is left as is and
// the caller reads off lambda = T(v,v,v) ~ 0.
void power_iterate(const SymTensor3& t, Vector& v, std::size_t iterations, double tol) {
    for (std::size_t n = 0; n < iterations; ++n) {
        Vector next = contract_to_vector(t, v);
        const double len = norm2(next);
        if (len < 1e-150) return;
        double delta2 = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            next[i] /= len;
            const double g = next[i] - v[i];
            delta2 += g * g;
        }
        v.swap(next);
        if (std::sqrt(delta2) < tol) return;
    }
}

void sort_factors_desc(SpectralFactors& f) {
    std::vector<std::size_t> order(f.lambdas.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return f.lambdas[a] > f.lambdas[b];
    });
    SpectralFactors sorted;
    sorted.lambdas.reserve(f.lambdas.size());
    sorted.vs.reserve(f.vs.size());
    for (std::size_t i : order) {
        sorted.lambdas.push_back(f.lambdas[i]);
        sorted.vs.push_back(std::move(f.vs[i]));
    }
    f = std::move(sorted);
}

TopicParams pad_with_uniform_topics(const TopicParams& rec, std::size_t k, std::size_t d) {
    const std::size_t have = rec.k();
    if (have >= k) return rec;
    // recovered topics keep have/k of the mass in proportion, the padded
    // uniform topics take 1/k each
    TopicParams out;
    out.omega.assign(k, 1.0 / static_cast<double>(k));
    out.u = Matrix(d, k);
    const double shrink = static_cast<double>(have) / static_cast<double>(k);
    for (std::size_t c = 0; c < have; ++c) {
        out.omega[c] = rec.omega[c] * shrink;
        for (std::size_t i = 0; i < d; ++i) out.u(i, c) = rec.u(i, c);
    }
    const double uniform_word = 1.0 / static_cast<double>(d);
    for (std::size_t c = have; c < k; ++c)
        for (std::size_t i = 0; i < d; ++i) out.u(i, c) = uniform_word;
    return out;
}

}  // namespace

SpectralFactors tensor_power_method(const SymTensor3& t, std::size_t k,
                                    const PowerMethodConfig& cfg, Xoshiro256pp& rng) {
    cfg.validate();
    if (k == 0) throw InputError("tensor_power_method: k must be >= 1");
    if (k > t.dim())
        throw InputError("tensor_power_method: cannot extract more factors than dim");

    SymTensor3 work = t;
    SpectralFactors out;
    for (std::size_t factor = 0; factor < k; ++factor) {
        Vector best;
        double best_val = -std::numeric_limits<double>::infinity();
        for (std::size_t l = 0; l < cfg.restarts; ++l) {
            Vector v = random_unit(t.dim(), rng);
            power_iterate(work, v, cfg.iterations, cfg.tol);
            const double val = contract_to_scalar(work, v);
            if (val > best_val) {
                best_val = val;
                best = std::move(v);
            }
        }
        power_iterate(work, best, cfg.iterations, cfg.tol);
        const double lambda = contract_to_scalar(work, best);
        if (!(lambda > 0.0)) {
            sort_factors_desc(out);
            throw DegenerateDecompositionError(
                "tensor_power_method: non-positive eigenvalue at factor " +
                    std::to_string(factor),
                std::move(out));
        }
        work.add_cube(best, -lambda);
        out.lambdas.push_back(lambda);
        out.vs.push_back(std::move(best));
    }
    sort_factors_desc(out);
    return out;
}

std::pair<Vector, Matrix> recover_params_raw(const SpectralFactors& f, const Whitener& wh) {
    const std::size_t count = f.count();
    if (count == 0) throw InputError("recover_params_raw: no factors");
    Vector omega(count);
    Matrix u(wh.vocab_dim(), count);
    for (std::size_t c = 0; c < count; ++c) {
        const double lambda = f.lambdas[c];
        omega[c] = 1.0 / (lambda * lambda);
        const Vector col = unwhiten(wh, f.vs[c], lambda);
        for (std::size_t i = 0; i < wh.vocab_dim(); ++i) u(i, c) = col[i];
    }
    return {std::move(omega), std::move(u)};
}

TopicParams recover_params(const SpectralFactors& f, const Whitener& wh) {
    for (double lambda : f.lambdas)
        if (!(lambda > 0.0))
            throw DegenerateRecoveryError(
                "recover_params: non-positive eigenvalue (vanishing topic)");
    auto [omega, u] = recover_params_raw(f, wh);

    double omega_sum = 0.0;
    for (double& w : omega) {
        if (w < 0.0) w = 0.0;
        omega_sum += w;
    }
    if (omega_sum <= 0.0)
        throw DegenerateRecoveryError("recover_params: topic prior mass vanished");
    for (double& w : omega) w /= omega_sum;

    for (std::size_t c = 0; c < u.cols(); ++c) {
        double col_sum = 0.0;
        for (std::size_t i = 0; i < u.rows(); ++i) {
            if (u(i, c) < 0.0) u(i, c) = 0.0;
            col_sum += u(i, c);
        }
        if (col_sum <= 0.0)
            throw DegenerateRecoveryError("recover_params: topic " + std::to_string(c) +
                                          " clamped to an all-zero word column");
        for (std::size_t i = 0; i < u.rows(); ++i) u(i, c) /= col_sum;
    }

    TopicParams p;
    p.omega = std::move(omega);
    p.u = std::move(u);
    p.sort_by_omega_desc();
    return p;
}

bool StepDiagnostics::any_fallback() const {
    return warmup || whitened_rank < requested_rank ||
           factors_recovered < whitened_rank || degenerate_recovery;
}

std::string StepDiagnostics::fallback_code() const {
    if (warmup) return "warmup";
    std::string code;
    const auto append = [&code](const std::string& part) {
        if (!code.empty()) code += '+';
        code += part;
    };
    if (whitened_rank < requested_rank) append("rank" + std::to_string(whitened_rank));
    if (factors_recovered < whitened_rank)
        append("power" + std::to_string(factors_recovered));
    if (degenerate_recovery) append("recovery");
    return code;
}

SpectralLeader::SpectralLeader(std::size_t d, std::size_t k, SpectralConfig cfg,
                               std::uint64_t seed)
    : d_(d),
      k_(k),
      cfg_(cfg),
      pm_base_seed_(derive_seed(seed, 1)),
      reservoir_(cfg.reservoir_capacity, derive_seed(seed, 0)),
      pair_counts_(SymMatrix::zeros(require_positive_dim(d))) {
    if (k == 0) throw InputError("SpectralLeader: d and k must be >= 1");
    cfg_.pm.validate();
}

std::uint64_t SpectralLeader::pm_seed_for_step(std::uint64_t base_seed, std::uint64_t t) {
    return derive_seed(derive_seed(base_seed, 1), t);
}

SymMatrix SpectralLeader::scaled_pair_counts() const {
    SymMatrix m2 = pair_counts_;
    m2.scale(1.0 / (6.0 * static_cast<double>(reservoir_.size())));
    return m2;
}

std::pair<TopicParams, StepDiagnostics> SpectralLeader::step(const OneHotTriple& x) {
    if (x.d != d_) throw InputError("SpectralLeader::step: dimension mismatch");
    const std::uint64_t t = reservoir_.seen() + 1;

    StepDiagnostics diag;
    diag.requested_rank = k_;
    TopicParams params = TopicParams::uniform(k_, d_);

    if (t <= k_) {
        // too few past observations for a rank-K decomposition
        diag.warmup = true;
    } else {
        const auto samples = reservoir_.items();
        const SymMatrix m2 =
            cfg_.incremental_m2 ? scaled_pair_counts() : empirical_m2(samples, d_);

        std::size_t rank = k_;
        std::optional<Whitener> wh;
        try {
            wh = build_whitener(m2, k_);
        } catch (const RankDeficiencyError& e) {
            rank = e.usable_rank();
            if (rank > 0) wh = build_whitener(m2, rank);
        }
        diag.whitened_rank = rank;

        if (rank > 0) {
            const SymTensor3 t3 = empirical_whitened_t3(samples, *wh);
            Xoshiro256pp rng(derive_seed(pm_base_seed_, t));
            SpectralFactors factors;
            try {
                factors = tensor_power_method(t3, rank, cfg_.pm, rng);
            } catch (const DegenerateDecompositionError& e) {
                factors = e.partial();
            }
            diag.factors_recovered = factors.count();
            if (factors.count() > 0) {
                try {
                    TopicParams rec = recover_params(factors, *wh);
                    if (rec.k() < k_) rec = pad_with_uniform_topics(rec, k_, d_);
                    rec.sort_by_omega_desc();
                    params = std::move(rec);
                } catch (const DegenerateRecoveryError&) {
                    diag.degenerate_recovery = true;
                }
            }
        }
    }

    const ReservoirDelta delta = reservoir_.update(x);
    if (cfg_.incremental_m2 && delta.inserted) {
        pair_counts_.accumulate_pairs(x, 1.0);
        if (delta.evicted) pair_counts_.accumulate_pairs(*delta.evicted, -1.0);
    }
    return {std::move(params), diag};
}

TopicParams offline_recover(std::span<const OneHotTriple> samples, std::size_t d,
                            std::size_t k, const PowerMethodConfig& cfg,
                            std::uint64_t seed) {
    const SymMatrix m2 = empirical_m2(samples, d);
    const Whitener wh = build_whitener(m2, k);
    const SymTensor3 t3 = empirical_whitened_t3(samples, wh);
    Xoshiro256pp rng(seed);
    const SpectralFactors factors = tensor_power_method(t3, k, cfg, rng);
    return recover_params(factors, wh);
}

}  // namespace specstream
