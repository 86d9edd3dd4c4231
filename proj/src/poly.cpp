#include "invsq/poly.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>
#include <unordered_map>

namespace invsq {

// ---------------------------------------------------------------- Monomial

namespace {

constexpr unsigned __int128 kByte = 0xFF;

unsigned __int128 degree_bits(int d) { return static_cast<unsigned __int128>(d) << 120; }

}  // namespace

Monomial Monomial::from_exponents(std::span<const int> exps) {
    if (static_cast<int>(exps.size()) > kMaxVars)
        throw InvalidInput("too many variables for a monomial (max 15)");
    unsigned __int128 k = 0;
    int total = 0;
    for (std::size_t i = 0; i < exps.size(); ++i) {
        if (exps[i] < 0) throw InvalidInput("negative exponent");
        if (exps[i] > kMaxDegree) throw InvalidInput("exponent exceeds 255");
        k |= static_cast<unsigned __int128>(exps[i]) << (8 * i);
        total += exps[i];
    }
    if (total > kMaxDegree) throw InvalidInput("monomial total degree exceeds 255");
    return Monomial(k | degree_bits(total));
}

Monomial Monomial::var(int i, int e) {
    if (i < 0 || i >= kMaxVars) throw InvalidInput("variable index out of range");
    if (e < 0 || e > kMaxDegree) throw InvalidInput("exponent out of range");
    return Monomial((static_cast<unsigned __int128>(e) << (8 * i)) | degree_bits(e));
}

int Monomial::degree_in(int begin, int end) const {
    int d = 0;
    for (int v = begin; v < end; ++v) d += exponent(v);
    return d;
}

std::vector<int> Monomial::exponents(int nvars) const {
    std::vector<int> e(nvars);
    for (int i = 0; i < nvars; ++i) e[i] = exponent(i);
    return e;
}

bool Monomial::divides(const Monomial& other) const {
    if (degree() > other.degree()) return false;
    for (int i = 0; i < kMaxVars; ++i)
        if (exponent(i) > other.exponent(i)) return false;
    return true;
}

Monomial operator*(const Monomial& a, const Monomial& b) {
    if (a.degree() + b.degree() > Monomial::kMaxDegree)
        throw MathError("monomial total degree exceeds 255");
    return Monomial(a.key_ + b.key_);
}

Monomial operator/(const Monomial& a, const Monomial& b) { return Monomial(a.key_ - b.key_); }

Monomial Monomial::without(int var) const { return with_exponent(var, 0); }

Monomial Monomial::with_exponent(int var, int e) const {
    int old = exponent(var);
    int total = degree() - old + e;
    if (e < 0 || total > kMaxDegree) throw MathError("exponent out of range");
    unsigned __int128 k = key_ & ~(kByte << (8 * var)) & ~(kByte << 120);
    k |= static_cast<unsigned __int128>(e) << (8 * var);
    return Monomial(k | degree_bits(total));
}

// ---------------------------------------------------------------- helpers

namespace {

class Accumulator {
public:
    explicit Accumulator(std::size_t hint = 0) { map_.reserve(hint); }

    void add(const Monomial& m, const BigRat& c) {
        auto [it, inserted] = map_.try_emplace(m, c);
        if (!inserted) it->second += c;
    }

    std::vector<Poly::Term> take() {
        std::vector<Poly::Term> out;
        out.reserve(map_.size());
        for (auto& [m, c] : map_)
            if (sgn(c) != 0) out.emplace_back(m, std::move(c));
        std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
        map_.clear();
        return out;
    }

private:
    std::unordered_map<Monomial, BigRat, MonomialHash> map_;
};

}  // namespace

// ---------------------------------------------------------------- Poly

Poly::Poly(int nvars) : nvars_(nvars) {
    if (nvars < 0 || nvars > Monomial::kMaxVars) throw InvalidInput("polynomial variable count out of range (0..15)");
}

Poly Poly::constant(int nvars, const BigRat& c) {
    Poly p(nvars);
    if (sgn(c) != 0) p.terms_.emplace_back(Monomial(), c);
    return p;
}

Poly Poly::variable(int nvars, int i) {
    if (i < 0 || i >= nvars) throw InvalidInput("variable index out of range");
    Poly p(nvars);
    p.terms_.emplace_back(Monomial::var(i), BigRat(1));
    return p;
}

Poly Poly::monomial(int nvars, const Monomial& m, const BigRat& c) {
    Poly p(nvars);
    if (sgn(c) != 0) p.terms_.emplace_back(m, c);
    return p;
}

Poly Poly::from_terms(int nvars, std::vector<Term> terms) {
    Poly p(nvars);
    p.terms_ = std::move(terms);
    p.normalize();
    return p;
}

Poly Poly::linear(int nvars, std::span<const BigRat> coeffs, const BigRat& constant) {
    if (static_cast<int>(coeffs.size()) > nvars) throw InvalidInput("linear form longer than variable count");
    std::vector<Term> t;
    for (std::size_t i = 0; i < coeffs.size(); ++i)
        if (sgn(coeffs[i]) != 0) t.emplace_back(Monomial::var(static_cast<int>(i)), coeffs[i]);
    if (sgn(constant) != 0) t.emplace_back(Monomial(), constant);
    return from_terms(nvars, std::move(t));
}

void Poly::normalize() {
    std::sort(terms_.begin(), terms_.end(), [](const Term& a, const Term& b) { return a.first > b.first; });
    std::vector<Term> out;
    out.reserve(terms_.size());
    for (auto& t : terms_) {
        if (!out.empty() && out.back().first == t.first) {
            out.back().second += t.second;
            continue;
        }
        if (!out.empty() && sgn(out.back().second) == 0) out.pop_back();
        out.push_back(std::move(t));
    }
    if (!out.empty() && sgn(out.back().second) == 0) out.pop_back();
    terms_ = std::move(out);
}

bool Poly::is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_[0].first.is_one()); }

BigRat Poly::constant_term() const {
    if (!terms_.empty() && terms_.back().first.is_one()) return terms_.back().second;
    return 0;
}

int Poly::total_degree() const { return terms_.empty() ? -1 : terms_.front().first.degree(); }

int Poly::degree_in(int var) const {
    int d = terms_.empty() ? -1 : 0;
    for (const auto& t : terms_) d = std::max(d, t.first.exponent(var));
    return d;
}

int Poly::min_degree_in(int var) const {
    if (terms_.empty()) return -1;
    int d = Monomial::kMaxDegree;
    for (const auto& t : terms_) d = std::min(d, t.first.exponent(var));
    return d;
}

bool Poly::depends_on(int var) const {
    for (const auto& t : terms_)
        if (t.first.exponent(var) != 0) return true;
    return false;
}

bool Poly::is_linear() const {
    if (terms_.empty()) return false;
    return terms_.front().first.degree() == 1;
}

Poly Poly::operator-() const {
    Poly r = *this;
    for (auto& t : r.terms_) t.second = -t.second;
    return r;
}

namespace {

std::vector<Poly::Term> merge_terms(const std::vector<Poly::Term>& a, const std::vector<Poly::Term>& b, bool subtract) {
    std::vector<Poly::Term> out;
    out.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].first > b[j].first)) {
            out.push_back(a[i++]);
        } else if (i == a.size() || b[j].first > a[i].first) {
            out.emplace_back(b[j].first, subtract ? BigRat(-b[j].second) : b[j].second);
            ++j;
        } else {
            BigRat c = subtract ? BigRat(a[i].second - b[j].second) : BigRat(a[i].second + b[j].second);
            if (sgn(c) != 0) out.emplace_back(a[i].first, std::move(c));
            ++i;
            ++j;
        }
    }
    return out;
}

void check_same_space(const Poly& a, const Poly& b) {
    if (a.nvars() != b.nvars()) throw InvalidInput("polynomials live in different variable spaces");
}

}  // namespace

Poly& Poly::operator+=(const Poly& o) {
    check_same_space(*this, o);
    if (o.terms_.empty()) return *this;
    terms_ = merge_terms(terms_, o.terms_, false);
    return *this;
}

Poly& Poly::operator-=(const Poly& o) {
    check_same_space(*this, o);
    if (o.terms_.empty()) return *this;
    terms_ = merge_terms(terms_, o.terms_, true);
    return *this;
}

Poly& Poly::operator*=(const Poly& o) {
    *this = *this * o;
    return *this;
}

Poly& Poly::operator*=(const BigRat& c) {
    if (sgn(c) == 0) {
        terms_.clear();
        return *this;
    }
    for (auto& t : terms_) t.second *= c;
    return *this;
}

Poly operator*(const Poly& a, const Poly& b) {
    check_same_space(a, b);
    Poly r(a.nvars_);
    if (a.terms_.empty() || b.terms_.empty()) return r;
    if (b.terms_.size() == 1) {
        r.terms_.reserve(a.terms_.size());
        const auto& [bm, bc] = b.terms_[0];
        for (const auto& [m, c] : a.terms_) r.terms_.emplace_back(m * bm, c * bc);
        return r;
    }
    if (a.terms_.size() == 1) return b * a;
    Accumulator acc(a.terms_.size() * b.terms_.size() / 2 + 8);
    BigRat tmp;
    for (const auto& [am, ac] : a.terms_)
        for (const auto& [bm, bc] : b.terms_) {
            tmp = ac * bc;
            acc.add(am * bm, tmp);
        }
    r.terms_ = acc.take();
    return r;
}

bool operator==(const Poly& a, const Poly& b) { return a.nvars_ == b.nvars_ && a.terms_ == b.terms_; }

bool operator<(const Poly& a, const Poly& b) {
    if (a.nvars_ != b.nvars_) return a.nvars_ < b.nvars_;
    std::size_t n = std::min(a.terms_.size(), b.terms_.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (a.terms_[i].first != b.terms_[i].first) return a.terms_[i].first > b.terms_[i].first;
        if (a.terms_[i].second != b.terms_[i].second) return a.terms_[i].second < b.terms_[i].second;
    }
    return a.terms_.size() < b.terms_.size();
}

Poly Poly::pow(unsigned e) const {
    Poly result = constant(nvars_, 1);
    Poly base = *this;
    while (e) {
        if (e & 1u) result = result * base;
        e >>= 1;
        if (e) base = base * base;
    }
    return result;
}

Poly Poly::derivative(int var) const {
    Poly r(nvars_);
    for (const auto& [m, c] : terms_) {
        int e = m.exponent(var);
        if (e == 0) continue;
        r.terms_.emplace_back(m.with_exponent(var, e - 1), c * e);
    }
    // Lowering one exponent by one keeps grlex order among distinct results.
    return r;
}

BigRat Poly::evaluate(std::span<const BigRat> point) const {
    if (static_cast<int>(point.size()) < nvars_) throw InvalidInput("evaluation point too short");
    BigRat sum = 0;
    BigRat term;
    for (const auto& [m, c] : terms_) {
        term = c;
        for (int i = 0; i < nvars_; ++i) {
            int e = m.exponent(i);
            if (e == 0) continue;
            BigRat p;
            mpz_pow_ui(p.get_num_mpz_t(), point[i].get_num_mpz_t(), e);
            mpz_pow_ui(p.get_den_mpz_t(), point[i].get_den_mpz_t(), e);
            term *= p;
        }
        sum += term;
    }
    return sum;
}

Poly Poly::substitute(std::span<const Poly> images) const {
    if (static_cast<int>(images.size()) != nvars_) throw InvalidInput("substitution needs one image per variable");
    int out_vars = images.empty() ? 0 : images[0].nvars();
    for (const auto& im : images)
        if (im.nvars() != out_vars) throw InvalidInput("substitution images live in different spaces");
    std::vector<std::vector<Poly>> powers(nvars_);
    auto power = [&](int i, int e) -> const Poly& {
        auto& cache = powers[i];
        if (cache.empty()) cache.push_back(constant(out_vars, 1));
        while (static_cast<int>(cache.size()) <= e) cache.push_back(cache.back() * images[i]);
        return cache[e];
    };
    Accumulator acc(terms_.size() * 4 + 8);
    for (const auto& [m, c] : terms_) {
        Poly t = constant(out_vars, c);
        for (int i = 0; i < nvars_; ++i) {
            int e = m.exponent(i);
            if (e) t = t * power(i, e);
        }
        for (const auto& [tm, tc] : t.terms_) acc.add(tm, tc);
    }
    return from_terms(out_vars, acc.take());
}

std::vector<Poly> Poly::coefficients_in(int var) const {
    int d = degree_in(var);
    std::vector<std::vector<Term>> parts(std::max(d + 1, 0));
    for (const auto& [m, c] : terms_) parts[m.exponent(var)].emplace_back(m.without(var), c);
    std::vector<Poly> out;
    out.reserve(parts.size());
    for (auto& p : parts) out.push_back(from_terms(nvars_, std::move(p)));
    return out;
}

Poly Poly::homogeneous_part(int begin, int end, int d) const {
    Poly r(nvars_);
    for (const auto& t : terms_)
        if (t.first.degree_in(begin, end) == d) r.terms_.push_back(t);
    return r;
}

Poly Poly::embed(int new_nvars, int offset) const {
    if (offset < 0 || offset + nvars_ > new_nvars) throw InvalidInput("embedding does not fit");
    std::vector<Term> t;
    t.reserve(terms_.size());
    for (const auto& [m, c] : terms_) {
        std::vector<int> e(new_nvars, 0);
        for (int i = 0; i < nvars_; ++i) e[i + offset] = m.exponent(i);
        t.emplace_back(Monomial::from_exponents(e), c);
    }
    return from_terms(new_nvars, std::move(t));
}

std::optional<Poly> Poly::divide_exact(const Poly& b) const {
    check_same_space(*this, b);
    if (b.is_zero()) throw MathError("polynomial division by zero");
    if (is_zero()) return Poly(nvars_);
    const auto& [lb, lcb] = b.terms_.front();
    if (b.terms_.size() == 1) {
        Poly q(nvars_);
        q.terms_.reserve(terms_.size());
        for (const auto& [m, c] : terms_) {
            if (!lb.divides(m)) return std::nullopt;
            q.terms_.emplace_back(m / lb, c / lcb);
        }
        return q;
    }
    if (total_degree() < b.total_degree()) return std::nullopt;
    std::map<Monomial, BigRat, std::greater<>> rem;
    for (const auto& t : terms_) rem.emplace(t.first, t.second);
    Poly q(nvars_);
    BigRat tmp;
    while (!rem.empty()) {
        auto it = rem.begin();
        if (!lb.divides(it->first)) return std::nullopt;
        Monomial qm = it->first / lb;
        BigRat qc = it->second / lcb;
        rem.erase(it);
        for (std::size_t k = 1; k < b.terms_.size(); ++k) {
            Monomial key = qm * b.terms_[k].first;
            tmp = qc * b.terms_[k].second;
            auto [pos, inserted] = rem.try_emplace(key, -tmp);
            if (!inserted) {
                pos->second -= tmp;
                if (sgn(pos->second) == 0) rem.erase(pos);
            }
        }
        q.terms_.emplace_back(qm, std::move(qc));
    }
    return q;
}

std::pair<BigRat, Poly> Poly::primitive_split() const {
    if (terms_.empty()) return {BigRat(0), Poly(nvars_)};
    BigInt l = 1, g = 0;
    for (const auto& [m, c] : terms_) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), c.get_den_mpz_t());
    for (const auto& [m, c] : terms_) {
        BigInt v = c.get_num() * (l / c.get_den());
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), v.get_mpz_t());
    }
    BigRat scale(g, l);
    scale.canonicalize();
    if (sgn(terms_.front().second) < 0) scale = -scale;
    Poly prim = *this;
    BigRat inv = 1 / scale;
    prim *= inv;
    return {scale, std::move(prim)};
}

Monomial Poly::monomial_content() const {
    if (terms_.empty()) return Monomial();
    std::vector<int> e = terms_.front().first.exponents(nvars_);
    for (const auto& t : terms_)
        for (int i = 0; i < nvars_; ++i) e[i] = std::min(e[i], t.first.exponent(i));
    return Monomial::from_exponents(e);
}

std::string Poly::to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [m, c] : terms_) {
        BigRat a = abs(c);
        if (first) {
            if (sgn(c) < 0) os << "-";
        } else {
            os << (sgn(c) < 0 ? " - " : " + ");
        }
        first = false;
        bool unit = (a == 1);
        if (!unit || m.is_one()) os << pretty_rat(a);
        bool need_star = !unit;
        for (int i = 0; i < nvars_; ++i) {
            int e = m.exponent(i);
            if (!e) continue;
            if (need_star) os << "*";
            os << "x" << (i + 1);
            if (e > 1) os << "^" << e;
            need_star = true;
        }
    }
    return os.str();
}

// ---------------------------------------------------------------- gcd

namespace {

int highest_var(const Poly& p) {
    int v = -1;
    for (int i = 0; i < p.nvars(); ++i)
        if (p.depends_on(i)) v = i;
    return v;
}

Poly prim_part(const Poly& p) { return p.primitive_split().second; }

Poly content_in(const Poly& p, int var);

/// Pseudo-remainder of a by b with respect to var, integer content removed.
Poly pseudo_remainder(Poly a, const Poly& b, int var) {
    int db = b.degree_in(var);
    Poly lcb = b.coefficients_in(var)[db];
    while (!a.is_zero() && a.degree_in(var) >= db) {
        int da = a.degree_in(var);
        Poly lca = a.coefficients_in(var)[da];
        Poly shift = Poly::monomial(a.nvars(), Monomial::var(var, da - db), 1);
        a = lcb * a - lca * shift * b;
        a = prim_part(a);
    }
    return a;
}

Poly primitive_in(const Poly& p, int var) {
    Poly c = content_in(p, var);
    auto q = p.divide_exact(c);
    if (!q) throw MathError("internal: content does not divide polynomial");
    return prim_part(*q);
}

Poly content_in(const Poly& p, int var) {
    auto coeffs = p.coefficients_in(var);
    Poly g(p.nvars());
    for (const auto& c : coeffs) {
        if (c.is_zero()) continue;
        if (c.is_constant()) return Poly::constant(p.nvars(), 1);
        g = gcd(g, c);
        if (g.is_constant()) return g;
    }
    return g;
}

/// Univariate images of p in var, the other variables set to point values.
std::vector<BigRat> univariate_image(const Poly& p, int var, std::span<const BigRat> point) {
    std::vector<BigRat> out(static_cast<std::size_t>(p.degree_in(var) + 1));
    for (const auto& [m, c] : p.terms()) {
        BigRat t = c;
        for (int i = 0; i < p.nvars(); ++i) {
            int e = m.exponent(i);
            if (i == var || e == 0) continue;
            BigRat x;
            mpz_pow_ui(x.get_num_mpz_t(), point[static_cast<std::size_t>(i)].get_num_mpz_t(), static_cast<unsigned long>(e));
            mpz_pow_ui(x.get_den_mpz_t(), point[static_cast<std::size_t>(i)].get_den_mpz_t(), static_cast<unsigned long>(e));
            t *= x;
        }
        out[static_cast<std::size_t>(m.exponent(var))] += t;
    }
    while (!out.empty() && sgn(out.back()) == 0) out.pop_back();
    return out;
}

/// Degree of the univariate gcd over Q.
int univariate_gcd_degree(std::vector<BigRat> a, std::vector<BigRat> b) {
    if (a.size() < b.size()) std::swap(a, b);
    while (!b.empty()) {
        while (a.size() >= b.size()) {
            BigRat f = a.back() / b.back();
            std::size_t shift = a.size() - b.size();
            for (std::size_t i = 0; i < b.size(); ++i) a[i + shift] -= f * b[i];
            while (!a.empty() && sgn(a.back()) == 0) a.pop_back();
            if (a.empty()) break;
        }
        std::swap(a, b);
    }
    return static_cast<int>(a.size()) - 1;
}

/// Sufficient test for gcd(a, b) being free of var, where b is primitive in var:
/// a gcd g with deg_var(g) > 0 maps to a common factor of positive degree at
/// any point where lc_var(b) does not vanish.
bool coprime_in_var_by_evaluation(const Poly& a, const Poly& b, int var) {
    Poly lcb = b.coefficients_in(var)[static_cast<std::size_t>(b.degree_in(var))];
    std::vector<BigRat> point(static_cast<std::size_t>(a.nvars()));
    for (int attempt = 0; attempt < 3; ++attempt) {
        for (int i = 0; i < a.nvars(); ++i)
            point[static_cast<std::size_t>(i)] = BigRat(7 + 13 * i + 29 * attempt * (i + 1)) / BigRat(3 + attempt + i);
        if (sgn(lcb.evaluate(point)) == 0) continue;
        auto ia = univariate_image(a, var, point);
        auto ib = univariate_image(b, var, point);
        if (ia.empty()) return false;
        return univariate_gcd_degree(std::move(ia), std::move(ib)) == 0;
    }
    return false;
}

}  // namespace

Poly gcd(const Poly& a0, const Poly& b0) {
    check_same_space(a0, b0);
    if (a0.is_zero()) return prim_part(b0);
    if (b0.is_zero()) return prim_part(a0);
    if (a0.is_constant() || b0.is_constant()) return Poly::constant(a0.nvars(), 1);
    if (a0 == b0) return prim_part(a0);
    // b is the smaller input; its content is computed in full, a's only as far as needed.
    const Poly& a = a0.size() >= b0.size() ? a0 : b0;
    const Poly& b = a0.size() >= b0.size() ? b0 : a0;
    int v = -1;
    for (int i = 0; i < a.nvars(); ++i)
        if (a.depends_on(i) && b.depends_on(i) && (v < 0 || b.degree_in(i) <= b.degree_in(v))) v = i;
    if (v < 0) {
        // No shared variable: the gcd lives in the content of a with respect to any of its variables.
        return gcd(content_in(a, highest_var(a)), b);
    }
    Poly cb = content_in(b, v);
    Poly c = cb;
    if (!cb.is_constant()) {
        for (const auto& ac : a.coefficients_in(v)) {
            if (ac.is_zero()) continue;
            c = gcd(c, ac);
            if (c.is_constant()) break;
        }
    }
    Poly pa = prim_part(a);
    Poly pb = cb.is_constant() ? prim_part(b) : prim_part(*b.divide_exact(cb));
    if (pa.divide_exact(pb)) return prim_part(c * pb);
    if (coprime_in_var_by_evaluation(pa, pb, v)) return prim_part(c);
    if (pa.degree_in(v) < pb.degree_in(v)) std::swap(pa, pb);
    Poly g(a.nvars());
    while (true) {
        Poly r = pseudo_remainder(pa, pb, v);
        if (r.is_zero()) {
            g = pb;
            break;
        }
        if (r.degree_in(v) == 0) {
            g = Poly::constant(a.nvars(), 1);
            break;
        }
        pa = std::move(pb);
        pb = primitive_in(r, v);
    }
    if (!g.is_constant()) g = primitive_in(g, v);
    return prim_part(c * g);
}

}  // namespace invsq
