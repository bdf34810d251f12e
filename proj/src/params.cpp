#include "specstream/params.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

namespace specstream {

namespace {

constexpr double kSimplexTol = 1e-9;

void check_simplex(std::span<const double> v, const char* what) {
    double sum = 0.0;
    for (double x : v) {
        if (!(x >= 0.0)) throw InputError(std::string(what) + ": negative entry");
        sum += x;
    }
    if (std::abs(sum - 1.0) > kSimplexTol)
        throw InputError(std::string(what) + ": weights do not sum to 1");
}

}  // namespace

TopicParams TopicParams::uniform(std::size_t k, std::size_t d) {
    if (k == 0 || d == 0) throw InputError("TopicParams::uniform: k and d must be >= 1");
    TopicParams p;
    p.omega.assign(k, 1.0 / static_cast<double>(k));
    p.u = Matrix(d, k);
    const double w = 1.0 / static_cast<double>(d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t c = 0; c < k; ++c) p.u(i, c) = w;
    return p;
}

TopicParams TopicParams::checked(Vector omega, Matrix u) {
    if (omega.empty() || u.rows() == 0) throw InputError("TopicParams: empty parameters");
    if (u.cols() != omega.size())
        throw InputError("TopicParams: omega length and u column count differ");
    check_simplex(omega, "TopicParams omega");
    for (std::size_t c = 0; c < u.cols(); ++c) {
        Vector col = u.column(c);
        check_simplex(col, "TopicParams u column");
    }
    TopicParams p;
    p.omega = std::move(omega);
    p.u = std::move(u);
    return p;
}

void TopicParams::sort_by_omega_desc() {
    const std::size_t kk = k();
    std::vector<std::size_t> order(kk);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return omega[a] > omega[b]; });
    Vector new_omega(kk);
    Matrix new_u(d(), kk);
    for (std::size_t c = 0; c < kk; ++c) {
        new_omega[c] = omega[order[c]];
        for (std::size_t i = 0; i < d(); ++i) new_u(i, c) = u(i, order[c]);
    }
    omega = std::move(new_omega);
    u = std::move(new_u);
}

TopicParams smoothed(const TopicParams& p, double delta) {
    if (delta < 0.0) throw InputError("smoothed: delta must be >= 0");
    TopicParams out = p;
    const double k = static_cast<double>(p.k());
    const double d = static_cast<double>(p.d());
    for (double& w : out.omega) w = (w + delta) / (1.0 + k * delta);
    for (std::size_t c = 0; c < p.k(); ++c)
        for (std::size_t i = 0; i < p.d(); ++i)
            out.u(i, c) = (p.u(i, c) + delta) / (1.0 + d * delta);
    return out;
}

}  // namespace specstream
