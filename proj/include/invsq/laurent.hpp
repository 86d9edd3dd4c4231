#ifndef INVSQ_LAURENT_HPP
#define INVSQ_LAURENT_HPP

#include "invsq/matrix.hpp"
#include "invsq/ratfunc.hpp"

#include <map>
#include <optional>
#include <span>
#include <vector>

namespace invsq {

/// l(x) = <coeffs, x> on the first coeffs.size() variables.
struct LinearForm {
    std::vector<BigRat> coeffs;

    explicit LinearForm(std::vector<BigRat> c);
    int dim() const { return static_cast<int>(coeffs.size()); }
    Poly as_poly(int nvars) const;
};

/// Scaled orthogonal frame adapted to a linear form. Row 0 is alpha itself, the
/// remaining rows complete it to an orthogonal basis with primitive integer
/// entries. New coordinates are y = rows * x, so y_1 = <alpha, x>.
struct Frame {
    Matrix rows;
    std::vector<BigRat> gram;  // squared lengths of the rows
    Matrix to_x;               // rows^-1, x = to_x * y
};

/// Takes alpha, then e_1..e_n in order, keeping each vector whose Gram-Schmidt
/// residual against the accepted rows is nonzero.
Frame complete_frame(std::span<const BigRat> alpha);

/// f(A y) for an invertible A acting on the first A.rows() variables; later
/// variables (parameters) are left alone.
RatFunc substitute_linear(const RatFunc& f, const Matrix& A);

/// Laurent data of f in one variable: coefficients of var^k for
/// min_order <= k <= k_max, each free of var.
struct LaurentSlice {
    LinearForm form{{1}};
    Frame frame;
    int var = 0;
    int nvars = 0;
    int min_order = 0;
    int k_max = 0;
    std::map<int, RatFunc> coeffs;  // nonzero coefficients only

    bool empty() const { return coeffs.empty(); }
    /// Coefficient of var^k; throws for k > k_max.
    RatFunc coeff(int k) const;
};

/// Expansion in the variable var. When k_max is omitted it defaults to min_order + 4.
LaurentSlice laurent_in_var(const RatFunc& f, int var, std::optional<int> k_max = std::nullopt);

/// Expansion along l: f is rewritten in the frame of l (complete_frame) and expanded
/// in y_1 = l(x). Coefficients are rational functions of y_2..y_n and parameters.
LaurentSlice laurent_along(const RatFunc& f, const LinearForm& l, std::optional<int> k_max = std::nullopt);

/// Only the pole order: -min_order when f has a pole along var, else 0 or less.
int order_in_var(const RatFunc& f, int var);

}  // namespace invsq

#endif  // INVSQ_LAURENT_HPP
