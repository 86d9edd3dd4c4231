#ifndef INVSQ_POLY_HPP
#define INVSQ_POLY_HPP

#include "invsq/bigrat.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace invsq {

/// Exponent vector packed into a 128-bit key: one byte per variable (variable i
/// in byte i) and the total degree in the top byte. Integer comparison of keys
/// is graded lexicographic order with x1 < x2 < ... < xn.
class Monomial {
public:
    static constexpr int kMaxVars = 15;
    static constexpr int kMaxDegree = 255;

    constexpr Monomial() = default;

    static Monomial from_exponents(std::span<const int> exps);
    static Monomial var(int i, int e = 1);

    int exponent(int var) const {
        return static_cast<int>((key_ >> (8 * var)) & 0xFF);
    }
    int degree() const { return static_cast<int>(key_ >> 120); }
    bool is_one() const { return key_ == 0; }

    /// Sum of exponents over variables [begin, end).
    int degree_in(int begin, int end) const;

    std::vector<int> exponents(int nvars) const;

    bool divides(const Monomial& other) const;

    friend Monomial operator*(const Monomial& a, const Monomial& b);
    /// Requires b.divides(a).
    friend Monomial operator/(const Monomial& a, const Monomial& b);

    Monomial without(int var) const;
    Monomial with_exponent(int var, int e) const;

    friend auto operator<=>(const Monomial&, const Monomial&) = default;

    unsigned __int128 key() const { return key_; }

private:
    explicit constexpr Monomial(unsigned __int128 k) : key_(k) {}
    unsigned __int128 key_ = 0;
};

struct MonomialHash {
    std::size_t operator()(const Monomial& m) const noexcept {
        auto k = m.key();
        auto lo = static_cast<std::uint64_t>(k);
        auto hi = static_cast<std::uint64_t>(k >> 64);
        return static_cast<std::size_t>(lo * 0x9E3779B97F4A7C15ULL ^ (hi + 0x632BE59BD9B4E019ULL + (lo << 6)));
    }
};

/// Sparse multivariate polynomial over Q. Terms are kept sorted in decreasing
/// grlex order with no zero coefficients.
class Poly {
public:
    using Term = std::pair<Monomial, BigRat>;

    explicit Poly(int nvars = 0);

    static Poly constant(int nvars, const BigRat& c);
    static Poly variable(int nvars, int i);
    static Poly monomial(int nvars, const Monomial& m, const BigRat& c);
    static Poly from_terms(int nvars, std::vector<Term> terms);
    /// sum_i coeffs[i] * x_i + constant; coeffs may be shorter than nvars.
    static Poly linear(int nvars, std::span<const BigRat> coeffs, const BigRat& constant = 0);

    int nvars() const { return nvars_; }
    const std::vector<Term>& terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }
    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const;
    /// Constant term value (0 if absent).
    BigRat constant_term() const;
    const Term& leading_term() const { return terms_.front(); }

    int total_degree() const;
    int degree_in(int var) const;
    int min_degree_in(int var) const;
    bool depends_on(int var) const;
    /// Total degree of every term is 1 (no constant term allowed either way: affine forms count).
    bool is_linear() const;

    Poly operator-() const;
    Poly& operator+=(const Poly& o);
    Poly& operator-=(const Poly& o);
    Poly& operator*=(const Poly& o);
    Poly& operator*=(const BigRat& c);
    friend Poly operator+(Poly a, const Poly& b) { return a += b; }
    friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
    friend Poly operator*(const Poly& a, const Poly& b);
    friend Poly operator*(Poly a, const BigRat& c) { return a *= c; }
    friend Poly operator*(const BigRat& c, Poly a) { return a *= c; }

    friend bool operator==(const Poly& a, const Poly& b);
    friend bool operator!=(const Poly& a, const Poly& b) { return !(a == b); }
    /// Total order used to sort factor lists: by nvars, then term-wise.
    friend bool operator<(const Poly& a, const Poly& b);

    Poly pow(unsigned e) const;
    Poly derivative(int var) const;
    BigRat evaluate(std::span<const BigRat> point) const;
    /// Replaces x_i by images[i]; all images must share nvars, which becomes the result's nvars.
    Poly substitute(std::span<const Poly> images) const;
    /// Coefficients of powers of `var`: result[d] holds the part multiplying var^d (var removed).
    std::vector<Poly> coefficients_in(int var) const;
    /// Terms whose degree in variables [begin, end) equals d.
    Poly homogeneous_part(int begin, int end, int d) const;
    /// Moves the polynomial into a space with new_nvars variables, variable i going to i + offset.
    Poly embed(int new_nvars, int offset) const;

    /// Quotient if b divides *this exactly, otherwise nullopt. b must be nonzero.
    std::optional<Poly> divide_exact(const Poly& b) const;

    /// Writes *this = scale * prim with prim having coprime integer coefficients and
    /// positive leading coefficient. Zero maps to (0, 0).
    std::pair<BigRat, Poly> primitive_split() const;

    /// Largest monomial dividing every term.
    Monomial monomial_content() const;

    std::string to_string() const;

private:
    void normalize();
    int nvars_;
    std::vector<Term> terms_;
};

/// Greatest common divisor, primitive over Z with positive leading coefficient.
/// gcd(0, 0) = 0; gcd(p, 0) is the primitive part of p.
Poly gcd(const Poly& a, const Poly& b);

}  // namespace invsq

#endif  // INVSQ_POLY_HPP
