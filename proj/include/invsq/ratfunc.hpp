#ifndef INVSQ_RATFUNC_HPP
#define INVSQ_RATFUNC_HPP

#include "invsq/poly.hpp"

#include <span>
#include <string>
#include <vector>

namespace invsq {

/// One factor base^exp of a denominator.
struct DenFactor {
    Poly base;
    int exp = 1;
    friend bool operator==(const DenFactor&, const DenFactor&) = default;
};

/// Reduced quotient num / den of polynomials over Q.
///
/// The denominator is stored as a product of pairwise coprime, non-constant,
/// primitive integer polynomials with positive leading coefficient, none of
/// them divisible by a variable except the variable itself. All scalar content
/// lives in the numerator. Linear factors are cancelled by trial division and
/// nonlinear ones through polynomial gcd, so gcd(num, den) is a unit. The
/// expanded denominator is then unique; its grouping into factors need not be.
class RatFunc {
public:
    explicit RatFunc(int nvars = 0);
    RatFunc(Poly p);  // NOLINT: polynomials are rational functions

    static RatFunc constant(int nvars, const BigRat& c);
    static RatFunc variable(int nvars, int i);
    /// num / den; throws MathError if den is zero.
    static RatFunc quotient(Poly num, const Poly& den);
    /// num / prod(base^exp). Bases may be arbitrary nonzero polynomials.
    static RatFunc from_factors(Poly num, std::vector<DenFactor> den);
    /// 1 / base^e.
    static RatFunc inverse_power(const Poly& base, int e);

    int nvars() const { return num_.nvars(); }
    const Poly& num() const { return num_; }
    const std::vector<DenFactor>& den_factors() const { return den_; }
    /// Expanded denominator polynomial.
    Poly den() const;

    bool is_zero() const { return num_.is_zero(); }
    bool is_polynomial() const { return den_.empty(); }
    bool is_constant() const { return den_.empty() && num_.is_constant(); }
    BigRat constant_value() const;
    bool depends_on(int var) const;

    RatFunc operator-() const;
    RatFunc& operator+=(const RatFunc& o);
    RatFunc& operator-=(const RatFunc& o);
    RatFunc& operator*=(const RatFunc& o);
    RatFunc& operator*=(const BigRat& c);
    RatFunc& operator/=(const RatFunc& o);
    friend RatFunc operator+(RatFunc a, const RatFunc& b) { return a += b; }
    friend RatFunc operator-(RatFunc a, const RatFunc& b) { return a -= b; }
    friend RatFunc operator*(RatFunc a, const RatFunc& b) { return a *= b; }
    friend RatFunc operator*(RatFunc a, const BigRat& c) { return a *= c; }
    friend RatFunc operator*(const BigRat& c, RatFunc a) { return a *= c; }
    friend RatFunc operator/(RatFunc a, const RatFunc& b) { return a /= b; }

    /// Compares numerators and expanded denominators, so differently grouped
    /// factorizations of the same denominator compare equal.
    friend bool operator==(const RatFunc& a, const RatFunc& b);

    RatFunc inverse() const;
    RatFunc pow(int e) const;
    RatFunc derivative(int var) const;
    BigRat evaluate(std::span<const BigRat> point) const;
    /// Replaces x_i by images[i] (any polynomials, possibly non-invertible maps).
    RatFunc substitute(std::span<const Poly> images) const;
    RatFunc embed(int new_nvars, int offset) const;

    std::string to_string() const;

private:
    void reduce();
    Poly num_;
    std::vector<DenFactor> den_;
};

/// Sum of many rational functions over a single common denominator.
RatFunc sum(std::span<const RatFunc> terms, int nvars);

}  // namespace invsq

#endif  // INVSQ_RATFUNC_HPP
