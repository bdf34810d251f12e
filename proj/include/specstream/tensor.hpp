#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "specstream/errors.hpp"

namespace specstream {

using Vector = std::vector<double>;

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

// Dense row-major matrix. Plumbing shared by the whitener, topic-word
// parameters and the eigensolver.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const {
        return {data_.data() + r * cols_, cols_};
    }

    Vector column(std::size_t c) const;
    std::span<const double> data() const { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Vector data_;
};

// A document reduced to three word indices in {0, ..., d-1}.
struct OneHotTriple {
    std::uint32_t w1;
    std::uint32_t w2;
    std::uint32_t w3;
    std::uint32_t d;  // vocabulary size

    OneHotTriple(std::uint32_t w1_, std::uint32_t w2_, std::uint32_t w3_, std::uint32_t d_)
        : w1(w1_), w2(w2_), w3(w3_), d(d_) {
        if (d == 0 || w1 >= d || w2 >= d || w3 >= d)
            throw InputError("OneHotTriple: word index out of range");
    }

    std::uint32_t word(std::size_t slot) const { return slot == 0 ? w1 : (slot == 1 ? w2 : w3); }

    bool operator==(const OneHotTriple& o) const {
        return w1 == o.w1 && w2 == o.w2 && w3 == o.w3 && d == o.d;
    }
};

// Dense symmetric d x d matrix. Symmetry is a construction guarantee: all
// mutating entry points write symmetric increments, there is no raw
// single-entry mutation.
class SymMatrix {
public:
    static SymMatrix zeros(std::size_t dim) { return SymMatrix(dim); }
    static SymMatrix identity(std::size_t dim);

    std::size_t dim() const { return dim_; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * dim_ + j]; }
    std::span<const double> entries() const { return data_; }

    // += s * u u^T
    void add_outer_self(std::span<const double> u, double s);

    // += s * (e_{wa} (x) e_{wb}) summed over the six ordered pairs of
    // distinct slots of x; the net increment is symmetric.
    void accumulate_pairs(const OneHotTriple& x, double s);

    void scale(double s);
    double trace() const;
    double sum() const;
    double frobenius_norm() const;
    double max_abs_offdiag() const;

    Vector apply(std::span<const double> v) const;  // M v

private:
    explicit SymMatrix(std::size_t dim) : dim_(dim), data_(dim * dim, 0.0) {
        if (dim == 0) throw InputError("SymMatrix: dim must be >= 1");
    }

    std::size_t dim_;
    Vector data_;
};

// Dense order-3 tensor with symmetrizing builders. Only small tensors are
// ever materialized: whitened moments are K x K x K and dense vocabulary
// tensors are restricted to test scale (dim <= 32); larger third moments
// stay in implicit rank-K form.
class SymTensor3 {
public:
    static constexpr std::size_t kDenseDimLimit = 32;

    static SymTensor3 zeros(std::size_t dim) { return SymTensor3(dim); }
    static SymTensor3 from_entries(std::size_t dim, Vector entries);

    std::size_t dim() const { return dim_; }
    double operator()(std::size_t i, std::size_t j, std::size_t k) const {
        return data_[(i * dim_ + j) * dim_ + k];
    }
    std::span<const double> entries() const { return data_; }

    // += s * a (x) b (x) c
    void add_rank1(std::span<const double> a, std::span<const double> b,
                   std::span<const double> c, double s);

    // += s * (sum over the six slot orderings of a, b, c); invariant under
    // permuting (a, b, c).
    void add_rank1_sym(std::span<const double> a, std::span<const double> b,
                       std::span<const double> c, double s);

    // += s * v (x) v (x) v
    void add_cube(std::span<const double> v, double s);

    // += s at the six slot orderings of (i, j, k)
    void add_one_hot_sym(std::size_t i, std::size_t j, std::size_t k, double s);

    void scale(double s);
    double sum() const;
    double frobenius_norm() const;

private:
    explicit SymTensor3(std::size_t dim);

    std::size_t dim_;
    Vector data_;
};

// T(i,j,k) += s * a(i) b(j) c(k)
void rank1_update(SymTensor3& t, std::span<const double> a, std::span<const double> b,
                  std::span<const double> c, double s);

double frobenius_distance(const SymTensor3& a, const SymTensor3& b);

// out(i) = sum_{j,k} T(i,j,k) v(j) v(k)  -- the power-iteration map T(I, v, v)
Vector contract_to_vector(const SymTensor3& t, std::span<const double> v);

// sum_{i,j,k} T(i,j,k) v(i) v(j) v(k)  -- T(v, v, v)
double contract_to_scalar(const SymTensor3& t, std::span<const double> v);

}  // namespace specstream
