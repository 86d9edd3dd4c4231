#ifndef INVSQ_BIGRAT_HPP
#define INVSQ_BIGRAT_HPP

#include <gmpxx.h>

#include <stdexcept>
#include <string>
#include <string_view>

namespace invsq {

/// Exact rational number. Always kept in lowest terms with a positive denominator.
using BigRat = mpq_class;
using BigInt = mpz_class;

/// Thrown for malformed input (bad numbers, wrong shapes, violated preconditions).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a mathematical operation has no result (division by zero, singular matrix).
class MathError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Parses "p/q" or "p" with decimal integers and q > 0.
BigRat parse_rat(std::string_view text);

/// Formats as "p/q" (q > 0), including integers ("3/1").
std::string format_rat(const BigRat& r);

/// Human-oriented form: "3" for integers, "3/4" otherwise.
std::string pretty_rat(const BigRat& r);

inline bool is_integer(const BigRat& r) { return r.get_den() == 1; }

BigRat binomial(unsigned n, unsigned k);

}  // namespace invsq

#endif  // INVSQ_BIGRAT_HPP
