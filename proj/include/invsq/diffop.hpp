#ifndef INVSQ_DIFFOP_HPP
#define INVSQ_DIFFOP_HPP

#include "invsq/matrix.hpp"
#include "invsq/ratfunc.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace invsq {

/// Sum of a_p(x) d^p. Coefficients live in ndiff differential variables followed
/// by nparams parameters that derivatives never touch. Multi-indices p are
/// Monomials over the differential variables.
class DiffOp {
public:
    using TermMap = std::map<Monomial, RatFunc>;

    explicit DiffOp(int ndiff = 0, int nparams = 0);

    static DiffOp scalar(int ndiff, const RatFunc& f);
    static DiffOp term(int ndiff, int nparams, std::span<const int> p, const RatFunc& c);
    static DiffOp term(int ndiff, const Monomial& p, const RatFunc& c);
    /// d_i^power.
    static DiffOp partial(int ndiff, int nparams, int i, int power = 1);
    /// Sum of d_i^2.
    static DiffOp laplacian(int ndiff, int nparams = 0);

    int ndiff() const { return ndiff_; }
    int nparams() const { return nparams_; }
    int nvars() const { return ndiff_ + nparams_; }
    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    /// Highest |p|; -1 for the zero operator.
    int order() const;
    RatFunc coeff(const Monomial& p) const;
    bool has_polynomial_coefficients() const;

    DiffOp operator-() const;
    DiffOp& operator+=(const DiffOp& o);
    DiffOp& operator-=(const DiffOp& o);
    DiffOp& operator*=(const BigRat& c);
    friend DiffOp operator+(DiffOp a, const DiffOp& b) { return a += b; }
    friend DiffOp operator-(DiffOp a, const DiffOp& b) { return a -= b; }
    friend DiffOp operator*(DiffOp a, const BigRat& c) { return a *= c; }
    friend DiffOp operator*(const BigRat& c, DiffOp a) { return a *= c; }
    /// Operator product (Leibniz).
    friend DiffOp operator*(const DiffOp& a, const DiffOp& b);
    friend bool operator==(const DiffOp&, const DiffOp&) = default;

    /// Left multiplication by a function.
    DiffOp times(const RatFunc& f) const;
    /// D(f) as a function.
    RatFunc apply(const RatFunc& f) const;
    /// Same operator with extra trailing parameters.
    DiffOp with_params(int nparams) const;
    /// Replaces every parameter by a value (the result has no parameters).
    DiffOp specialize(std::span<const BigRat> values) const;

    std::string to_string() const;
    /// Throws unless o has the same variable layout.
    void check_compatible(const DiffOp& o) const;

private:
    int ndiff_;
    int nparams_;
    TermMap terms_;
};

DiffOp compose(const DiffOp& a, const DiffOp& b);
DiffOp commutator(const DiffOp& a, const DiffOp& b);

/// Formal transpose sum (-1)^|p| d^p o a_p.
DiffOp adjoint(const DiffOp& d);

enum class Parity { self_adjoint, skew_adjoint, neither };
Parity parity_check(const DiffOp& d);
const char* to_string(Parity p);

/// Rewrites d in coordinates y = A x (A invertible, acting on the differential
/// variables): coefficients become functions of y via x = A^-1 y and d_x = A^T d_y.
DiffOp change_coords_linear(const DiffOp& d, const Matrix& A);
/// Same, requiring A^T A = I exactly.
DiffOp change_coords_orthogonal(const DiffOp& d, const Matrix& A);

/// Polynomial in (x, parameters, xi). Variables are laid out as the ndiff
/// coordinates, the nparams parameters, then ndiff symbol variables xi.
class SymbolPoly {
public:
    SymbolPoly(int ndiff, int nparams, Poly p);
    /// Pure xi polynomial from a constant-coefficient symbol map.
    static SymbolPoly from_xi(int ndiff, const Poly& xi_poly);

    int ndiff() const { return ndiff_; }
    int nparams() const { return nparams_; }
    const Poly& poly() const { return p_; }
    int xi_var(int i) const { return ndiff_ + nparams_ + i; }
    /// Part of xi-degree exactly d.
    SymbolPoly graded(int d) const;
    bool is_constant_in_x() const;
    /// The symbol as a polynomial in the ndiff xi variables only; requires is_constant_in_x.
    Poly xi_only() const;

    friend bool operator==(const SymbolPoly&, const SymbolPoly&) = default;
    std::string to_string() const;

private:
    int ndiff_;
    int nparams_;
    Poly p_;
};

/// Grade k part: the terms with |p| = order - k, as a map p -> coefficient.
using SymbolPart = DiffOp::TermMap;

/// Parts for k = 0..order(d). Empty vector for the zero operator.
std::vector<SymbolPart> symbol_parts(const DiffOp& d);
/// Converts a part to a SymbolPoly when every coefficient is polynomial.
std::optional<SymbolPoly> to_symbol_poly(const SymbolPart& part, int ndiff, int nparams);
/// Principal symbol of an operator whose top coefficients are polynomial.
SymbolPoly principal_symbol(const DiffOp& d);

}  // namespace invsq

#endif  // INVSQ_DIFFOP_HPP
