#include "invsq/bigrat.hpp"

#include <cctype>

namespace invsq {

namespace {

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

}  // namespace

BigRat parse_rat(std::string_view text) {
    std::string_view s = text;
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    auto slash = s.find('/');
    std::string_view num = s.substr(0, slash);
    std::string_view den = slash == std::string_view::npos ? std::string_view("1") : s.substr(slash + 1);
    std::string_view digits = num;
    if (!digits.empty() && (digits.front() == '-' || digits.front() == '+')) digits.remove_prefix(1);
    if (!all_digits(digits) || !all_digits(den))
        throw InvalidInput("malformed rational '" + std::string(text) + "'");
    BigInt d(std::string(den), 10);
    if (d == 0) throw InvalidInput("zero denominator in '" + std::string(text) + "'");
    std::string n(num);
    if (!n.empty() && n.front() == '+') n.erase(0, 1);
    BigRat r(BigInt(n, 10), d);
    r.canonicalize();
    return r;
}

std::string format_rat(const BigRat& r) {
    return r.get_num().get_str() + "/" + r.get_den().get_str();
}

std::string pretty_rat(const BigRat& r) {
    return is_integer(r) ? r.get_num().get_str() : format_rat(r);
}

BigRat binomial(unsigned n, unsigned k) {
    BigInt b;
    mpz_bin_uiui(b.get_mpz_t(), n, k);
    return BigRat(b);
}

}  // namespace invsq
