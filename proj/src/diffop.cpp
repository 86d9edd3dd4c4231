#include "invsq/diffop.hpp"

#include "invsq/laurent.hpp"

#include <sstream>

namespace invsq {

namespace {

/// Product of binomial(p_i, r_i).
BigRat multi_binomial(const Monomial& p, const Monomial& r, int n) {
    BigRat b = 1;
    for (int i = 0; i < n; ++i) {
        int pi = p.exponent(i), ri = r.exponent(i);
        if (ri) b *= binomial(static_cast<unsigned>(pi), static_cast<unsigned>(ri));
    }
    return b;
}

/// All multi-indices r <= p (componentwise).
std::vector<Monomial> sub_indices(const Monomial& p, int n) {
    std::vector<Monomial> out{Monomial()};
    for (int i = 0; i < n; ++i) {
        int e = p.exponent(i);
        if (!e) continue;
        std::vector<Monomial> next;
        next.reserve(out.size() * static_cast<std::size_t>(e + 1));
        for (const auto& m : out)
            for (int k = 0; k <= e; ++k) next.push_back(k ? m * Monomial::var(i, k) : m);
        out = std::move(next);
    }
    return out;
}

/// Memoized derivatives d^r f of one function.
class DerivativeCache {
public:
    DerivativeCache(const RatFunc& f, int ndiff) : ndiff_(ndiff) { cache_.emplace(Monomial(), f); }

    const RatFunc& get(const Monomial& r) {
        auto it = cache_.find(r);
        if (it != cache_.end()) return it->second;
        int i = 0;
        while (r.exponent(i) == 0) ++i;
        RatFunc d = get(r / Monomial::var(i)).derivative(i);
        return cache_.emplace(r, std::move(d)).first->second;
    }

private:
    int ndiff_;
    std::map<Monomial, RatFunc> cache_;
};

void accumulate(std::map<Monomial, std::vector<RatFunc>>& acc, const Monomial& p, RatFunc c) {
    if (!c.is_zero()) acc[p].push_back(std::move(c));
}

DiffOp::TermMap collect(std::map<Monomial, std::vector<RatFunc>>& acc, int nvars) {
    DiffOp::TermMap out;
    for (auto& [p, parts] : acc) {
        RatFunc s = sum(parts, nvars);
        if (!s.is_zero()) out.emplace(p, std::move(s));
    }
    return out;
}

}  // namespace

DiffOp::DiffOp(int ndiff, int nparams) : ndiff_(ndiff), nparams_(nparams) {
    if (ndiff < 0 || nparams < 0) throw InvalidInput("negative variable count");
    if (ndiff + nparams > Monomial::kMaxVars) throw InvalidInput("too many variables");
}

DiffOp DiffOp::scalar(int ndiff, const RatFunc& f) {
    DiffOp d(ndiff, f.nvars() - ndiff);
    if (!f.is_zero()) d.terms_.emplace(Monomial(), f);
    return d;
}

DiffOp DiffOp::term(int ndiff, int nparams, std::span<const int> p, const RatFunc& c) {
    if (static_cast<int>(p.size()) != ndiff) throw InvalidInput("multi-index length mismatch");
    DiffOp d(ndiff, nparams);
    if (c.nvars() != ndiff + nparams) throw InvalidInput("coefficient variable count mismatch");
    if (!c.is_zero()) d.terms_.emplace(Monomial::from_exponents(p), c);
    return d;
}

DiffOp DiffOp::term(int ndiff, const Monomial& p, const RatFunc& c) {
    DiffOp d(ndiff, c.nvars() - ndiff);
    for (int i = ndiff; i < Monomial::kMaxVars; ++i)
        if (p.exponent(i)) throw InvalidInput("multi-index touches a parameter");
    if (!c.is_zero()) d.terms_.emplace(p, c);
    return d;
}

DiffOp DiffOp::partial(int ndiff, int nparams, int i, int power) {
    if (i < 0 || i >= ndiff) throw InvalidInput("derivative index out of range");
    DiffOp d(ndiff, nparams);
    d.terms_.emplace(Monomial::var(i, power), RatFunc::constant(ndiff + nparams, 1));
    return d;
}

DiffOp DiffOp::laplacian(int ndiff, int nparams) {
    DiffOp d(ndiff, nparams);
    for (int i = 0; i < ndiff; ++i) d.terms_.emplace(Monomial::var(i, 2), RatFunc::constant(ndiff + nparams, 1));
    return d;
}

int DiffOp::order() const {
    int o = -1;
    for (const auto& [p, c] : terms_) o = std::max(o, p.degree());
    return o;
}

RatFunc DiffOp::coeff(const Monomial& p) const {
    auto it = terms_.find(p);
    return it == terms_.end() ? RatFunc(nvars()) : it->second;
}

bool DiffOp::has_polynomial_coefficients() const {
    for (const auto& [p, c] : terms_)
        if (!c.is_polynomial()) return false;
    return true;
}

void DiffOp::check_compatible(const DiffOp& o) const {
    if (ndiff_ != o.ndiff_ || nparams_ != o.nparams_) throw InvalidInput("operators live in different variable spaces");
}

DiffOp DiffOp::operator-() const {
    DiffOp d = *this;
    for (auto& [p, c] : d.terms_) c = -c;
    return d;
}

DiffOp& DiffOp::operator+=(const DiffOp& o) {
    check_compatible(o);
    for (const auto& [p, c] : o.terms_) {
        auto [it, inserted] = terms_.try_emplace(p, c);
        if (inserted) continue;
        it->second += c;
        if (it->second.is_zero()) terms_.erase(it);
    }
    return *this;
}

DiffOp& DiffOp::operator-=(const DiffOp& o) { return *this += -o; }

DiffOp& DiffOp::operator*=(const BigRat& c) {
    if (sgn(c) == 0) {
        terms_.clear();
        return *this;
    }
    for (auto& [p, a] : terms_) a *= c;
    return *this;
}

DiffOp operator*(const DiffOp& a, const DiffOp& b) { return compose(a, b); }

DiffOp compose(const DiffOp& a, const DiffOp& b) {
    a.check_compatible(b);
    int n = a.ndiff();
    std::map<Monomial, std::vector<RatFunc>> acc;
    std::map<Monomial, DerivativeCache> caches;
    for (const auto& [q, bq] : b.terms()) caches.emplace(q, DerivativeCache(bq, n));
    for (const auto& [p, ap] : a.terms()) {
        auto rs = sub_indices(p, n);
        for (const auto& [q, bq] : b.terms()) {
            auto& cache = caches.at(q);
            for (const auto& r : rs) {
                const RatFunc& d = cache.get(r);
                if (d.is_zero()) continue;
                accumulate(acc, (p / r) * q, ap * d * multi_binomial(p, r, n));
            }
        }
    }
    DiffOp out(n, a.nparams());
    for (auto& [p, c] : collect(acc, a.nvars())) out += DiffOp::term(n, p, c);
    return out;
}

DiffOp commutator(const DiffOp& a, const DiffOp& b) { return compose(a, b) - compose(b, a); }

DiffOp DiffOp::times(const RatFunc& f) const {
    if (f.nvars() != nvars()) throw InvalidInput("function variable count mismatch");
    DiffOp d(ndiff_, nparams_);
    for (const auto& [p, c] : terms_) {
        RatFunc x = f * c;
        if (!x.is_zero()) d.terms_.emplace(p, std::move(x));
    }
    return d;
}

RatFunc DiffOp::apply(const RatFunc& f) const {
    if (f.nvars() != nvars()) throw InvalidInput("function variable count mismatch");
    DerivativeCache cache(f, ndiff_);
    std::vector<RatFunc> parts;
    for (const auto& [p, c] : terms_) parts.push_back(c * cache.get(p));
    return sum(parts, nvars());
}

DiffOp DiffOp::with_params(int nparams) const {
    if (nparams < nparams_) throw InvalidInput("cannot drop parameters");
    DiffOp d(ndiff_, nparams);
    for (const auto& [p, c] : terms_) d.terms_.emplace(p, c.embed(ndiff_ + nparams, 0));
    return d;
}

DiffOp DiffOp::specialize(std::span<const BigRat> values) const {
    if (static_cast<int>(values.size()) != nparams_) throw InvalidInput("parameter value count mismatch");
    std::vector<Poly> images;
    for (int i = 0; i < ndiff_; ++i) images.push_back(Poly::variable(ndiff_, i));
    for (const auto& v : values) images.push_back(Poly::constant(ndiff_, v));
    DiffOp d(ndiff_, 0);
    for (const auto& [p, c] : terms_) {
        RatFunc s = c.substitute(images);
        if (!s.is_zero()) d.terms_.emplace(p, std::move(s));
    }
    return d;
}

std::string DiffOp::to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
        if (!first) os << " + ";
        first = false;
        os << "(" << it->second.to_string() << ")";
        if (!it->first.is_one()) {
            os << "*d[";
            for (int i = 0; i < ndiff_; ++i) os << (i ? "," : "") << it->first.exponent(i);
            os << "]";
        }
    }
    return os.str();
}

DiffOp adjoint(const DiffOp& d) {
    int n = d.ndiff();
    std::map<Monomial, std::vector<RatFunc>> acc;
    for (const auto& [p, a] : d.terms()) {
        DerivativeCache cache(a, n);
        BigRat sign = p.degree() % 2 ? -1 : 1;
        for (const auto& r : sub_indices(p, n)) {
            const RatFunc& dr = cache.get(r);
            if (dr.is_zero()) continue;
            accumulate(acc, p / r, dr * (sign * multi_binomial(p, r, n)));
        }
    }
    DiffOp out(n, d.nparams());
    for (auto& [p, c] : collect(acc, d.nvars())) out += DiffOp::term(n, p, c);
    return out;
}

Parity parity_check(const DiffOp& d) {
    DiffOp t = adjoint(d);
    if (t == d) return Parity::self_adjoint;
    if (t == -d) return Parity::skew_adjoint;
    return Parity::neither;
}

const char* to_string(Parity p) {
    switch (p) {
        case Parity::self_adjoint: return "self_adjoint";
        case Parity::skew_adjoint: return "skew_adjoint";
        case Parity::neither: return "neither";
    }
    return "neither";
}

DiffOp change_coords_linear(const DiffOp& d, const Matrix& A) {
    int n = d.ndiff();
    if (A.rows() != n || A.cols() != n) throw InvalidInput("coordinate change matrix has the wrong size");
    Matrix inv = A.inverse();
    // d_{x_i} = sum_j A_ji d_{y_j}, as a polynomial in the symbols.
    std::vector<Poly> dx;
    for (int i = 0; i < n; ++i) {
        std::vector<BigRat> col(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) col[static_cast<std::size_t>(j)] = A(j, i);
        dx.push_back(Poly::linear(n, col));
    }
    std::map<Monomial, std::vector<RatFunc>> acc;
    for (const auto& [p, a] : d.terms()) {
        RatFunc ay = a.nvars() > 0 ? substitute_linear(a, inv) : a;
        Poly sym = Poly::constant(n, 1);
        for (int i = 0; i < n; ++i)
            if (int e = p.exponent(i)) sym = sym * dx[static_cast<std::size_t>(i)].pow(static_cast<unsigned>(e));
        for (const auto& [m, c] : sym.terms()) accumulate(acc, m, ay * c);
    }
    DiffOp out(n, d.nparams());
    for (auto& [p, c] : collect(acc, d.nvars())) out += DiffOp::term(n, p, c);
    return out;
}

DiffOp change_coords_orthogonal(const DiffOp& d, const Matrix& A) {
    if (!A.is_orthogonal()) throw InvalidInput("coordinate change matrix is not orthogonal");
    return change_coords_linear(d, A);
}

SymbolPoly::SymbolPoly(int ndiff, int nparams, Poly p) : ndiff_(ndiff), nparams_(nparams), p_(std::move(p)) {
    if (p_.nvars() != 2 * ndiff + nparams) throw InvalidInput("symbol polynomial has the wrong variable count");
}

SymbolPoly SymbolPoly::from_xi(int ndiff, const Poly& xi_poly) {
    if (xi_poly.nvars() != ndiff) throw InvalidInput("xi polynomial has the wrong variable count");
    return SymbolPoly(ndiff, 0, xi_poly.embed(2 * ndiff, ndiff));
}

SymbolPoly SymbolPoly::graded(int d) const {
    return SymbolPoly(ndiff_, nparams_, p_.homogeneous_part(ndiff_ + nparams_, 2 * ndiff_ + nparams_, d));
}

bool SymbolPoly::is_constant_in_x() const {
    for (int i = 0; i < ndiff_; ++i)
        if (p_.depends_on(i)) return false;
    return true;
}

Poly SymbolPoly::xi_only() const {
    if (!is_constant_in_x()) throw InvalidInput("symbol depends on x");
    for (int i = 0; i < nparams_; ++i)
        if (p_.depends_on(ndiff_ + i)) throw InvalidInput("symbol depends on a parameter");
    std::vector<Poly> images(static_cast<std::size_t>(p_.nvars()), Poly(ndiff_));
    for (int i = 0; i < ndiff_; ++i) images[static_cast<std::size_t>(xi_var(i))] = Poly::variable(ndiff_, i);
    return p_.substitute(images);
}

std::string SymbolPoly::to_string() const { return p_.to_string(); }

std::vector<SymbolPart> symbol_parts(const DiffOp& d) {
    int ord = d.order();
    std::vector<SymbolPart> parts(static_cast<std::size_t>(ord + 1));
    for (const auto& [p, c] : d.terms()) parts[static_cast<std::size_t>(ord - p.degree())].emplace(p, c);
    return parts;
}

std::optional<SymbolPoly> to_symbol_poly(const SymbolPart& part, int ndiff, int nparams) {
    int total = 2 * ndiff + nparams;
    Poly out(total);
    for (const auto& [p, c] : part) {
        if (!c.is_polynomial()) return std::nullopt;
        std::vector<int> e(static_cast<std::size_t>(total));
        for (int i = 0; i < ndiff; ++i) e[static_cast<std::size_t>(ndiff + nparams + i)] = p.exponent(i);
        out += c.num().embed(total, 0) * Poly::monomial(total, Monomial::from_exponents(e), 1);
    }
    return SymbolPoly(ndiff, nparams, std::move(out));
}

SymbolPoly principal_symbol(const DiffOp& d) {
    if (d.is_zero()) return SymbolPoly(d.ndiff(), d.nparams(), Poly(2 * d.ndiff() + d.nparams()));
    auto s = to_symbol_poly(symbol_parts(d)[0], d.ndiff(), d.nparams());
    if (!s) throw InvalidInput("principal symbol has non-polynomial coefficients");
    return *s;
}

}  // namespace invsq
