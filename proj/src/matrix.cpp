#include "invsq/matrix.hpp"

#include <sstream>
#include <utility>

namespace invsq {

Matrix::Matrix(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows * cols)) {
    if (rows < 0 || cols < 0) throw InvalidInput("negative matrix dimension");
}

Matrix Matrix::identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1;
    return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<BigRat>>& rows) {
    int r = static_cast<int>(rows.size());
    int c = r ? static_cast<int>(rows[0].size()) : 0;
    Matrix m(r, c);
    for (int i = 0; i < r; ++i) {
        if (static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != c) throw InvalidInput("ragged matrix rows");
        for (int j = 0; j < c; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    return m;
}

std::vector<BigRat> Matrix::row(int i) const {
    return {a_.begin() + i * cols_, a_.begin() + (i + 1) * cols_};
}

Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw InvalidInput("matrix dimension mismatch");
    Matrix c(a.rows_, b.cols_);
    for (int i = 0; i < a.rows_; ++i)
        for (int k = 0; k < a.cols_; ++k) {
            const BigRat& x = a(i, k);
            if (sgn(x) == 0) continue;
            for (int j = 0; j < b.cols_; ++j) c(i, j) += x * b(k, j);
        }
    return c;
}

std::vector<BigRat> Matrix::apply(std::span<const BigRat> v) const {
    if (static_cast<int>(v.size()) != cols_) throw InvalidInput("vector length mismatch");
    std::vector<BigRat> out(static_cast<std::size_t>(rows_));
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) out[static_cast<std::size_t>(i)] += (*this)(i, j) * v[static_cast<std::size_t>(j)];
    return out;
}

Matrix Matrix::transpose() const {
    Matrix t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

namespace {

/// Row-reduces m in place (augmented with aug when given); returns the rank.
int eliminate(Matrix& m, Matrix* aug, BigRat* det) {
    int r = 0;
    if (det) *det = 1;
    for (int c = 0; c < m.cols() && r < m.rows(); ++c) {
        int piv = -1;
        for (int i = r; i < m.rows(); ++i)
            if (sgn(m(i, c)) != 0) {
                piv = i;
                break;
            }
        if (piv < 0) {
            if (det) *det = 0;
            continue;
        }
        if (piv != r) {
            for (int j = 0; j < m.cols(); ++j) std::swap(m(piv, j), m(r, j));
            if (aug)
                for (int j = 0; j < aug->cols(); ++j) std::swap((*aug)(piv, j), (*aug)(r, j));
            if (det) *det = -*det;
        }
        BigRat p = m(r, c);
        if (det) *det *= p;
        for (int j = 0; j < m.cols(); ++j) m(r, j) /= p;
        if (aug)
            for (int j = 0; j < aug->cols(); ++j) (*aug)(r, j) /= p;
        for (int i = 0; i < m.rows(); ++i) {
            if (i == r || sgn(m(i, c)) == 0) continue;
            BigRat f = m(i, c);
            for (int j = 0; j < m.cols(); ++j) m(i, j) -= f * m(r, j);
            if (aug)
                for (int j = 0; j < aug->cols(); ++j) (*aug)(i, j) -= f * (*aug)(r, j);
        }
        ++r;
    }
    if (det && r < m.rows()) *det = 0;
    return r;
}

}  // namespace

Matrix Matrix::inverse() const {
    if (rows_ != cols_) throw InvalidInput("inverse of a non-square matrix");
    Matrix m = *this;
    Matrix inv = identity(rows_);
    if (eliminate(m, &inv, nullptr) < rows_) throw MathError("singular matrix");
    return inv;
}

BigRat Matrix::determinant() const {
    if (rows_ != cols_) throw InvalidInput("determinant of a non-square matrix");
    Matrix m = *this;
    BigRat d;
    eliminate(m, nullptr, &d);
    return d;
}

int Matrix::rank() const {
    Matrix m = *this;
    return eliminate(m, nullptr, nullptr);
}

bool Matrix::is_orthogonal() const {
    return rows_ == cols_ && transpose() * *this == identity(rows_);
}

bool operator<(const Matrix& a, const Matrix& b) {
    if (a.rows_ != b.rows_) return a.rows_ < b.rows_;
    if (a.cols_ != b.cols_) return a.cols_ < b.cols_;
    for (std::size_t i = 0; i < a.a_.size(); ++i) {
        int c = cmp(a.a_[i], b.a_[i]);
        if (c) return c < 0;
    }
    return false;
}

std::string Matrix::to_string() const {
    std::ostringstream os;
    os << "[";
    for (int i = 0; i < rows_; ++i) {
        os << (i ? ", [" : "[");
        for (int j = 0; j < cols_; ++j) os << (j ? ", " : "") << pretty_rat((*this)(i, j));
        os << "]";
    }
    os << "]";
    return os.str();
}

BigRat dot(std::span<const BigRat> a, std::span<const BigRat> b) {
    if (a.size() != b.size()) throw InvalidInput("vector length mismatch");
    BigRat s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace invsq
