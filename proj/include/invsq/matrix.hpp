#ifndef INVSQ_MATRIX_HPP
#define INVSQ_MATRIX_HPP

#include "invsq/bigrat.hpp"

#include <span>
#include <string>
#include <vector>

namespace invsq {

/// Dense rational matrix, row-major.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols);
    static Matrix identity(int n);
    static Matrix from_rows(const std::vector<std::vector<BigRat>>& rows);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    BigRat& operator()(int i, int j) { return a_[static_cast<std::size_t>(i * cols_ + j)]; }
    const BigRat& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i * cols_ + j)]; }
    std::vector<BigRat> row(int i) const;

    friend Matrix operator*(const Matrix& a, const Matrix& b);
    std::vector<BigRat> apply(std::span<const BigRat> v) const;
    Matrix transpose() const;
    /// Throws MathError when singular.
    Matrix inverse() const;
    BigRat determinant() const;
    int rank() const;
    bool is_orthogonal() const;

    friend bool operator==(const Matrix&, const Matrix&) = default;
    /// Strict weak order for use as a set key.
    friend bool operator<(const Matrix& a, const Matrix& b);

    std::string to_string() const;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<BigRat> a_;
};

BigRat dot(std::span<const BigRat> a, std::span<const BigRat> b);

}  // namespace invsq

#endif  // INVSQ_MATRIX_HPP
