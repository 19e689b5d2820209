#pragma once

// Dense complex linear algebra: LU solves with partial pivoting, Parlett-
// Reinsch balancing, Householder Hessenberg reduction, single-shift
// (Wilkinson) QR eigenvalues, inverse-iteration eigenvectors.

#include <cstdint>
#include <vector>

#include "lame/poly.hpp"

namespace lame {

struct SingularMatrixError : Error {
    using Error::Error;
};

// Thrown when QR fails to deflate within the iteration budget.
struct QrError : Error {
    QrError(const std::string& msg, std::vector<cx> part)
        : Error(msg), partial(std::move(part)) {}
    std::vector<cx> partial;
};

class ComplexMatrix {
public:
    ComplexMatrix() = default;
    ComplexMatrix(int rows, int cols)
        : rows_(rows), cols_(cols), a_(size_t(rows) * cols, cx{}) {}

    static ComplexMatrix identity(int n);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    cx& operator()(int i, int j) { return a_[size_t(i) * cols_ + j]; }
    cx operator()(int i, int j) const { return a_[size_t(i) * cols_ + j]; }

    double norm_inf() const;

private:
    int rows_ = 0, cols_ = 0;
    std::vector<cx> a_;
};

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b);

// Partial-pivoting LU solve; pivot smaller than 1e-14*|A|_inf is an error.
std::vector<cx> lu_solve(const ComplexMatrix& a, const std::vector<cx>& b);

// Determinant via the same LU (tests only need well-conditioned inputs).
cx det(const ComplexMatrix& a);

// All eigenvalues, balance -> Hessenberg -> shifted QR with deflation.
std::vector<cx> eigenvalues(const ComplexMatrix& a);

// Same pipeline in double-double arithmetic; for matrices whose interior
// eigenvalues are too ill-conditioned for double starts (spectral module).
std::vector<cx> eigenvalues_dd(const ComplexMatrix& a);

// Unit 2-norm eigenvector by inverse iteration from a seeded random start.
std::vector<cx> eigenvector(const ComplexMatrix& a, cx lambda,
                            std::uint64_t seed = 0x5eed);

// Companion matrix of a monic-normalized polynomial (root oracle).
ComplexMatrix companion_matrix(const Poly& p);

} // namespace lame
