#include "specstream/tensor.hpp"

#include <cmath>
#include <utility>

namespace specstream {

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InputError("dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

Vector Matrix::column(std::size_t c) const {
    Vector out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = data_[r * cols_ + c];
    return out;
}

SymMatrix SymMatrix::identity(std::size_t dim) {
    SymMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m.data_[i * dim + i] = 1.0;
    return m;
}

void SymMatrix::add_outer_self(std::span<const double> u, double s) {
    if (u.size() != dim_) throw InputError("SymMatrix::add_outer_self: length mismatch");
    for (std::size_t i = 0; i < dim_; ++i) {
        const double si = s * u[i];
        double* row = data_.data() + i * dim_;
        for (std::size_t j = 0; j < dim_; ++j) row[j] += si * u[j];
    }
}

void SymMatrix::accumulate_pairs(const OneHotTriple& x, double s) {
    if (x.d != dim_) throw InputError("SymMatrix::accumulate_pairs: dimension mismatch");
    const std::size_t w[3] = {x.w1, x.w2, x.w3};
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 3; ++b)
            if (a != b) data_[w[a] * dim_ + w[b]] += s;
}

void SymMatrix::scale(double s) {
    for (double& v : data_) v *= s;
}

double SymMatrix::trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) t += data_[i * dim_ + i];
    return t;
}

double SymMatrix::sum() const {
    double t = 0.0;
    for (double v : data_) t += v;
    return t;
}

double SymMatrix::frobenius_norm() const { return norm2(data_); }

double SymMatrix::max_abs_offdiag() const {
    double m = 0.0;
    for (std::size_t i = 0; i < dim_; ++i)
        for (std::size_t j = 0; j < dim_; ++j)
            if (i != j) m = std::max(m, std::abs(data_[i * dim_ + j]));
    return m;
}

Vector SymMatrix::apply(std::span<const double> v) const {
    if (v.size() != dim_) throw InputError("SymMatrix::apply: length mismatch");
    Vector out(dim_, 0.0);
    for (std::size_t i = 0; i < dim_; ++i) {
        const double* row = data_.data() + i * dim_;
        double s = 0.0;
        for (std::size_t j = 0; j < dim_; ++j) s += row[j] * v[j];
        out[i] = s;
    }
    return out;
}

SymTensor3::SymTensor3(std::size_t dim) : dim_(dim) {
    if (dim == 0) throw InputError("SymTensor3: dim must be >= 1");
    if (dim > kDenseDimLimit)
        throw InputError("SymTensor3: dense d^3 storage is limited to dim <= 32; "
                         "use the implicit rank-K forms at larger scales");
    data_.assign(dim * dim * dim, 0.0);
}

SymTensor3 SymTensor3::from_entries(std::size_t dim, Vector entries) {
    SymTensor3 t(dim);
    if (entries.size() != dim * dim * dim)
        throw InputError("SymTensor3::from_entries: size mismatch");
    t.data_ = std::move(entries);
    return t;
}

void SymTensor3::add_rank1(std::span<const double> a, std::span<const double> b,
                           std::span<const double> c, double s) {
    if (a.size() != dim_ || b.size() != dim_ || c.size() != dim_)
        throw InputError("SymTensor3::add_rank1: length mismatch");
    for (std::size_t i = 0; i < dim_; ++i) {
        const double sa = s * a[i];
        if (sa == 0.0) continue;
        for (std::size_t j = 0; j < dim_; ++j) {
            const double sab = sa * b[j];
            double* slab = data_.data() + (i * dim_ + j) * dim_;
            for (std::size_t k = 0; k < dim_; ++k) slab[k] += sab * c[k];
        }
    }
}

void SymTensor3::add_rank1_sym(std::span<const double> a, std::span<const double> b,
                               std::span<const double> c, double s) {
    if (a.size() != dim_ || b.size() != dim_ || c.size() != dim_)
        throw InputError("SymTensor3::add_rank1_sym: length mismatch");
    for (std::size_t i = 0; i < dim_; ++i) {
        for (std::size_t j = 0; j < dim_; ++j) {
            double* slab = data_.data() + (i * dim_ + j) * dim_;
            const double ab = a[i] * b[j], ac = a[i] * c[j], ba = b[i] * a[j],
                         bc = b[i] * c[j], ca = c[i] * a[j], cb = c[i] * b[j];
            for (std::size_t k = 0; k < dim_; ++k)
                slab[k] += s * (ab * c[k] + ac * b[k] + ba * c[k] + bc * a[k] +
                                ca * b[k] + cb * a[k]);
        }
    }
}

void SymTensor3::add_cube(std::span<const double> v, double s) {
    if (v.size() != dim_) throw InputError("SymTensor3::add_cube: length mismatch");
    for (std::size_t i = 0; i < dim_; ++i) {
        const double si = s * v[i];
        for (std::size_t j = 0; j < dim_; ++j) {
            const double sij = si * v[j];
            double* slab = data_.data() + (i * dim_ + j) * dim_;
            for (std::size_t k = 0; k < dim_; ++k) slab[k] += sij * v[k];
        }
    }
}

void SymTensor3::add_one_hot_sym(std::size_t i, std::size_t j, std::size_t k, double s) {
    if (i >= dim_ || j >= dim_ || k >= dim_)
        throw InputError("SymTensor3::add_one_hot_sym: index out of range");
    const std::size_t w[3] = {i, j, k};
    static constexpr int kOrders[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                          {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (const auto& o : kOrders)
        data_[(w[o[0]] * dim_ + w[o[1]]) * dim_ + w[o[2]]] += s;
}

void SymTensor3::scale(double s) {
    for (double& v : data_) v *= s;
}

double SymTensor3::sum() const {
    double t = 0.0;
    for (double v : data_) t += v;
    return t;
}

double SymTensor3::frobenius_norm() const { return norm2(data_); }

void rank1_update(SymTensor3& t, std::span<const double> a, std::span<const double> b,
                  std::span<const double> c, double s) {
    t.add_rank1(a, b, c, s);
}

double frobenius_distance(const SymTensor3& a, const SymTensor3& b) {
    if (a.dim() != b.dim()) throw InputError("frobenius_distance: dimension mismatch");
    const auto ea = a.entries(), eb = b.entries();
    double s = 0.0;
    for (std::size_t i = 0; i < ea.size(); ++i) {
        const double g = ea[i] - eb[i];
        s += g * g;
    }
    return std::sqrt(s);
}

Vector contract_to_vector(const SymTensor3& t, std::span<const double> v) {
    const std::size_t d = t.dim();
    if (v.size() != d) throw InputError("contract_to_vector: length mismatch");
    const auto e = t.entries();
    Vector out(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double* slab = e.data() + (i * d + j) * d;
            double inner = 0.0;
            for (std::size_t k = 0; k < d; ++k) inner += slab[k] * v[k];
            acc += v[j] * inner;
        }
        out[i] = acc;
    }
    return out;
}

double contract_to_scalar(const SymTensor3& t, std::span<const double> v) {
    if (v.size() != t.dim()) throw InputError("contract_to_scalar: length mismatch");
    const Vector tv = contract_to_vector(t, v);
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += tv[i] * v[i];
    return s;
}

}  // namespace specstream
