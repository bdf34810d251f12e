#include "specstream/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace specstream {

namespace {

double offdiag_mass(const Vector& a, std::size_t d) {
    double s = 0.0;
    for (std::size_t p = 0; p < d; ++p)
        for (std::size_t q = p + 1; q < d; ++q) s += a[p * d + q] * a[p * d + q];
    return std::sqrt(2.0 * s);
}

}  // namespace

EigenDecomp sym_eig(const SymMatrix& m, double tol) {
    if (tol <= 0.0) throw InputError("sym_eig: tol must be > 0");
    const std::size_t d = m.dim();
    Vector a(m.entries().begin(), m.entries().end());

    // vt holds eigenvectors as rows so plane rotations touch contiguous memory
    Vector vt(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) vt[i * d + i] = 1.0;

    const double scale = std::max(1.0, m.frobenius_norm());
    constexpr std::size_t kMaxSweeps = 100;
    double off = offdiag_mass(a, d);

    for (std::size_t sweep = 0; sweep < kMaxSweeps && off > tol * scale; ++sweep) {
        // Entries this small cannot move the off-diagonal mass past the
        // tolerance; skipping them saves most rotations in late sweeps.
        const double skip = tol * scale / static_cast<double>(d * d);
        for (std::size_t p = 0; p < d; ++p) {
            for (std::size_t q = p + 1; q < d; ++q) {
                const double apq = a[p * d + q];
                if (std::abs(apq) <= skip) continue;

                const double app = a[p * d + p];
                const double aqq = a[q * d + q];
                const double theta = 0.5 * (aqq - app) / apq;
                double t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                if (theta < 0.0) t = -t;
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                double* rp = a.data() + p * d;
                double* rq = a.data() + q * d;
                for (std::size_t i = 0; i < d; ++i) {
                    const double aip = rp[i];
                    const double aiq = rq[i];
                    rp[i] = c * aip - s * aiq;
                    rq[i] = s * aip + c * aiq;
                }
                // restore the four entries of the (p,q) block exactly
                rp[p] = app - t * apq;
                rq[q] = aqq + t * apq;
                rp[q] = 0.0;
                rq[p] = 0.0;
                // mirror rows back onto columns
                for (std::size_t i = 0; i < d; ++i) {
                    a[i * d + p] = rp[i];
                    a[i * d + q] = rq[i];
                }

                double* vp = vt.data() + p * d;
                double* vq = vt.data() + q * d;
                for (std::size_t i = 0; i < d; ++i) {
                    const double vip = vp[i];
                    const double viq = vq[i];
                    vp[i] = c * vip - s * viq;
                    vq[i] = s * vip + c * viq;
                }
            }
        }
        off = offdiag_mass(a, d);
    }

    if (off > tol * scale)
        throw ConvergenceError(
            "sym_eig: Jacobi sweeps did not converge (off-diagonal residual " +
                std::to_string(off) + ")",
            off);

    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return a[x * d + x] > a[y * d + y];
    });

    EigenDecomp out;
    out.values.resize(d);
    out.vectors = Matrix(d, d);
    for (std::size_t j = 0; j < d; ++j) {
        const std::size_t src = order[j];
        out.values[j] = a[src * d + src];
        // sign convention: largest-magnitude entry positive
        std::size_t arg = 0;
        double best = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double mag = std::abs(vt[src * d + i]);
            if (mag > best) {
                best = mag;
                arg = i;
            }
        }
        const double sign = vt[src * d + arg] < 0.0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < d; ++i) out.vectors(i, j) = sign * vt[src * d + i];
    }
    return out;
}

Whitener build_whitener(const SymMatrix& m2, std::size_t k, std::optional<double> eps_rank) {
    if (k == 0) throw InputError("build_whitener: k must be >= 1");
    const EigenDecomp eig = sym_eig(m2);
    const double lead = eig.values.empty() ? 0.0 : eig.values.front();
    const double threshold = eps_rank ? *eps_rank : 1e-9 * std::max(lead, 0.0);

    std::size_t usable = 0;
    while (usable < eig.values.size() && eig.values[usable] > threshold) ++usable;
    if (usable < k)
        throw RankDeficiencyError("build_whitener: only " + std::to_string(usable) +
                                      " of " + std::to_string(k) +
                                      " requested eigenvalues exceed the rank threshold",
                                  usable);

    const std::size_t d = m2.dim();
    Whitener wh;
    wh.a.assign(eig.values.begin(), eig.values.begin() + k);
    wh.u = Matrix(d, k);
    wh.w = Matrix(d, k);
    for (std::size_t c = 0; c < k; ++c) {
        const double inv_sqrt = 1.0 / std::sqrt(wh.a[c]);
        for (std::size_t i = 0; i < d; ++i) {
            wh.u(i, c) = eig.vectors(i, c);
            wh.w(i, c) = eig.vectors(i, c) * inv_sqrt;
        }
    }
    return wh;
}

Vector unwhiten(const Whitener& wh, std::span<const double> v, double lambda) {
    const std::size_t k = wh.rank();
    if (v.size() != k) throw InputError("unwhiten: vector length must equal rank");
    Vector scaled(k);
    for (std::size_t c = 0; c < k; ++c) scaled[c] = lambda * std::sqrt(wh.a[c]) * v[c];
    Vector out(wh.vocab_dim(), 0.0);
    for (std::size_t i = 0; i < wh.vocab_dim(); ++i) {
        const auto row = wh.u.row(i);
        double s = 0.0;
        for (std::size_t c = 0; c < k; ++c) s += row[c] * scaled[c];
        out[i] = s;
    }
    return out;
}

}  // namespace specstream
