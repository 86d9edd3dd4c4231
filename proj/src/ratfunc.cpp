#include "invsq/ratfunc.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace invsq {

namespace {

bool sorted_factor_less(const DenFactor& a, const DenFactor& b) { return a.base < b.base; }

/// Normalizes raw factors: scalars go to *scale (as a divisor), monomial content
/// is split into single-variable factors, identical bases are merged.
std::vector<DenFactor> normalize_factors(std::vector<DenFactor> raw, BigRat& scale) {
    std::vector<DenFactor> out;
    auto push = [&out](Poly base, int e) {
        for (auto& f : out)
            if (f.base == base) {
                f.exp += e;
                return;
            }
        out.push_back({std::move(base), e});
    };
    for (auto& f : raw) {
        if (f.exp == 0) continue;
        if (f.exp < 0) throw InvalidInput("negative denominator exponent");
        if (f.base.is_zero()) throw MathError("division by zero");
        auto [s, prim] = f.base.primitive_split();
        BigRat se;
        mpz_pow_ui(se.get_num_mpz_t(), s.get_num_mpz_t(), f.exp);
        mpz_pow_ui(se.get_den_mpz_t(), s.get_den_mpz_t(), f.exp);
        se.canonicalize();
        scale *= se;
        if (prim.is_constant()) continue;
        Monomial mc = prim.monomial_content();
        if (!mc.is_one()) {
            for (int v = 0; v < prim.nvars(); ++v)
                if (int k = mc.exponent(v)) push(Poly::variable(prim.nvars(), v), k * f.exp);
            prim = *prim.divide_exact(Poly::monomial(prim.nvars(), mc, 1));
            if (prim.is_constant()) continue;
        }
        push(std::move(prim), f.exp);
    }
    return out;
}

void merge_equal_bases(std::vector<DenFactor>& fs) {
    std::vector<DenFactor> out;
    for (auto& f : fs) {
        auto it = std::find_if(out.begin(), out.end(), [&f](const DenFactor& o) { return o.base == f.base; });
        if (it != out.end()) it->exp += f.exp;
        else out.push_back(std::move(f));
    }
    fs = std::move(out);
}

/// Makes the bases pairwise coprime by repeatedly splitting off gcds.
void refine_coprime(std::vector<DenFactor>& fs) {
    // Splitting a square like (x - y)^2 yields the same linear base twice.
    merge_equal_bases(fs);
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < fs.size() && !changed; ++i)
            for (std::size_t j = i + 1; j < fs.size() && !changed; ++j) {
                if (fs[i].base.is_linear() && fs[j].base.is_linear()) continue;
                Poly g = gcd(fs[i].base, fs[j].base);
                if (g.is_constant()) continue;
                Poly qi = *fs[i].base.divide_exact(g);
                Poly qj = *fs[j].base.divide_exact(g);
                int ei = fs[i].exp, ej = fs[j].exp;
                std::vector<DenFactor> next;
                for (std::size_t k = 0; k < fs.size(); ++k)
                    if (k != i && k != j) next.push_back(std::move(fs[k]));
                std::vector<DenFactor> pieces{{g, ei + ej}};
                if (!qi.is_constant()) pieces.push_back({std::move(qi), ei});
                if (!qj.is_constant()) pieces.push_back({std::move(qj), ej});
                for (auto& p : pieces) {
                    bool merged = false;
                    for (auto& f : next)
                        if (f.base == p.base) {
                            f.exp += p.exp;
                            merged = true;
                        }
                    if (!merged) next.push_back(std::move(p));
                }
                fs = std::move(next);
                changed = true;
            }
    }
}

Poly expand_product(const std::vector<DenFactor>& fs, int nvars) {
    Poly p = Poly::constant(nvars, 1);
    for (const auto& f : fs) p = p * f.base.pow(static_cast<unsigned>(f.exp));
    return p;
}

bool all_linear(const std::vector<DenFactor>& fs) {
    return std::all_of(fs.begin(), fs.end(), [](const DenFactor& f) { return f.base.is_linear(); });
}

}  // namespace

RatFunc::RatFunc(int nvars) : num_(nvars) {}

RatFunc::RatFunc(Poly p) : num_(std::move(p)) {}

RatFunc RatFunc::constant(int nvars, const BigRat& c) { return RatFunc(Poly::constant(nvars, c)); }

RatFunc RatFunc::variable(int nvars, int i) { return RatFunc(Poly::variable(nvars, i)); }

RatFunc RatFunc::quotient(Poly num, const Poly& den) {
    if (den.is_zero()) throw MathError("division by zero");
    return from_factors(std::move(num), {{den, 1}});
}

RatFunc RatFunc::from_factors(Poly num, std::vector<DenFactor> den) {
    BigRat scale = 1;
    auto fs = normalize_factors(std::move(den), scale);
    if (!all_linear(fs)) refine_coprime(fs);
    RatFunc r;
    r.num_ = std::move(num);
    r.num_ *= BigRat(1 / scale);
    r.den_ = std::move(fs);
    r.reduce();
    return r;
}

RatFunc RatFunc::inverse_power(const Poly& base, int e) {
    return from_factors(Poly::constant(base.nvars(), 1), {{base, e}});
}

void RatFunc::reduce() {
    if (num_.is_zero()) {
        den_.clear();
        return;
    }
    bool restart = true;
    while (restart) {
        restart = false;
        for (std::size_t i = 0; i < den_.size() && !restart; ++i) {
            auto& f = den_[i];
            if (f.base.is_linear()) {
                while (f.exp > 0) {
                    auto q = num_.divide_exact(f.base);
                    if (!q) break;
                    num_ = std::move(*q);
                    --f.exp;
                }
                continue;
            }
            while (f.exp > 0) {
                Poly g = gcd(num_, f.base);
                if (g.is_constant()) break;
                if (g == f.base) {
                    num_ = *num_.divide_exact(f.base);
                    --f.exp;
                    continue;
                }
                // The factor is reducible: split it and start over.
                Poly rest = *f.base.divide_exact(g);
                int e = f.exp;
                den_.erase(den_.begin() + static_cast<std::ptrdiff_t>(i));
                den_.push_back({std::move(g), e});
                den_.push_back({std::move(rest), e});
                refine_coprime(den_);
                restart = true;
                break;
            }
        }
    }
    std::erase_if(den_, [](const DenFactor& f) { return f.exp == 0; });
    std::sort(den_.begin(), den_.end(), sorted_factor_less);
}

bool operator==(const RatFunc& a, const RatFunc& b) {
    if (a.num_ != b.num_) return false;
    if (a.den_ == b.den_) return true;
    return a.den() == b.den();
}

Poly RatFunc::den() const { return expand_product(den_, nvars()); }

BigRat RatFunc::constant_value() const {
    if (!is_constant()) throw InvalidInput("rational function is not constant");
    return num_.constant_term();
}

bool RatFunc::depends_on(int var) const {
    if (num_.depends_on(var)) return true;
    return std::any_of(den_.begin(), den_.end(), [var](const DenFactor& f) { return f.base.depends_on(var); });
}

RatFunc RatFunc::operator-() const {
    RatFunc r = *this;
    r.num_ = -r.num_;
    return r;
}

RatFunc& RatFunc::operator+=(const RatFunc& o) {
    if (o.is_zero()) return *this;
    if (is_zero()) return *this = o;
    if (den_.empty() && o.den_.empty()) {
        num_ += o.num_;
        return *this;
    }
    if (den_ == o.den_) {
        num_ += o.num_;
        reduce();
        return *this;
    }
    RatFunc terms[2] = {*this, o};
    return *this = sum(terms, nvars());
}

RatFunc& RatFunc::operator-=(const RatFunc& o) { return *this += -o; }

RatFunc& RatFunc::operator*=(const BigRat& c) {
    if (sgn(c) == 0) return *this = RatFunc(nvars());
    num_ *= c;
    return *this;
}

RatFunc& RatFunc::operator*=(const RatFunc& o) {
    if (is_zero() || o.is_zero()) return *this = RatFunc(nvars());
    if (o.is_constant()) return *this *= o.num_.constant_term();
    if (is_constant()) {
        BigRat c = num_.constant_term();
        *this = o;
        return *this *= c;
    }
    if (den_.empty() && o.den_.empty()) {
        num_ = num_ * o.num_;
        return *this;
    }
    // Cross-cancel before multiplying to keep the numerator small.
    RatFunc a = from_factors(num_, o.den_);
    RatFunc b = from_factors(o.num_, den_);
    std::vector<DenFactor> fs = a.den_;
    fs.insert(fs.end(), b.den_.begin(), b.den_.end());
    Poly n = a.num_ * b.num_;
    if (all_linear(fs)) {
        std::map<Poly, int> merged;
        for (auto& f : fs) merged[f.base] += f.exp;
        RatFunc r;
        r.num_ = std::move(n);
        for (auto& [base, e] : merged) r.den_.push_back({base, e});
        return *this = std::move(r);
    }
    return *this = from_factors(std::move(n), std::move(fs));
}

RatFunc RatFunc::inverse() const {
    if (is_zero()) throw MathError("division by zero");
    return from_factors(den(), {{num_, 1}});
}

RatFunc& RatFunc::operator/=(const RatFunc& o) {
    if (o.is_zero()) throw MathError("division by zero");
    return *this *= o.inverse();
}

RatFunc RatFunc::pow(int e) const {
    if (e < 0) return inverse().pow(-e);
    RatFunc r;
    r.num_ = num_.pow(static_cast<unsigned>(e));
    for (const auto& f : den_) r.den_.push_back({f.base, f.exp * e});
    if (e == 0) r.den_.clear();
    return r;
}

RatFunc RatFunc::derivative(int var) const {
    int n = nvars();
    if (den_.empty()) return RatFunc(num_.derivative(var));
    // d(N / prod f^e) = (N' F - N sum e_f f' F/f) / prod f^(e + [f depends on var]),  F = prod of dependent f
    std::vector<std::size_t> dep;
    for (std::size_t i = 0; i < den_.size(); ++i)
        if (den_[i].base.depends_on(var)) dep.push_back(i);
    if (dep.empty()) {
        RatFunc r = *this;
        r.num_ = num_.derivative(var);
        r.reduce();
        return r;
    }
    Poly full = Poly::constant(n, 1);
    for (auto i : dep) full = full * den_[i].base;
    Poly numer = num_.derivative(var) * full;
    for (auto i : dep) {
        Poly others = Poly::constant(n, 1);
        for (auto j : dep)
            if (j != i) others = others * den_[j].base;
        numer -= num_ * (den_[i].base.derivative(var) * others) * BigRat(den_[i].exp);
    }
    RatFunc r;
    r.num_ = std::move(numer);
    r.den_ = den_;
    for (auto i : dep) ++r.den_[i].exp;
    r.reduce();
    return r;
}

BigRat RatFunc::evaluate(std::span<const BigRat> point) const {
    BigRat d = 1;
    for (const auto& f : den_) {
        BigRat v = f.base.evaluate(point);
        if (sgn(v) == 0) throw MathError("denominator vanishes at evaluation point");
        for (int k = 0; k < f.exp; ++k) d *= v;
    }
    return num_.evaluate(point) / d;
}

RatFunc RatFunc::substitute(std::span<const Poly> images) const {
    std::vector<DenFactor> fs;
    fs.reserve(den_.size());
    for (const auto& f : den_) {
        Poly b = f.base.substitute(images);
        if (b.is_zero()) throw MathError("denominator vanishes identically under substitution");
        fs.push_back({std::move(b), f.exp});
    }
    return from_factors(num_.substitute(images), std::move(fs));
}

RatFunc RatFunc::embed(int new_nvars, int offset) const {
    RatFunc r;
    r.num_ = num_.embed(new_nvars, offset);
    for (const auto& f : den_) r.den_.push_back({f.base.embed(new_nvars, offset), f.exp});
    // Embedding preserves coprimality, primitivity and grlex leading terms.
    std::sort(r.den_.begin(), r.den_.end(), sorted_factor_less);
    return r;
}

std::string RatFunc::to_string() const {
    if (den_.empty()) return num_.to_string();
    std::ostringstream os;
    os << "(" << num_.to_string() << ")/(";
    for (std::size_t i = 0; i < den_.size(); ++i) {
        if (i) os << "*";
        os << "(" << den_[i].base.to_string() << ")";
        if (den_[i].exp > 1) os << "^" << den_[i].exp;
    }
    os << ")";
    return os.str();
}

RatFunc sum(std::span<const RatFunc> terms, int nvars) {
    // Group by identical denominators first; numerators then add directly.
    std::map<std::vector<std::pair<Poly, int>>, Poly> groups;
    bool linear = true;
    for (const auto& t : terms) {
        if (t.is_zero()) continue;
        if (t.nvars() != nvars) throw InvalidInput("rational functions live in different variable spaces");
        std::vector<std::pair<Poly, int>> key;
        for (const auto& f : t.den_factors()) {
            key.emplace_back(f.base, f.exp);
            linear = linear && f.base.is_linear();
        }
        auto [it, inserted] = groups.try_emplace(std::move(key), t.num());
        if (!inserted) it->second += t.num();
    }
    if (groups.empty()) return RatFunc(nvars);
    if (groups.size() == 1) {
        const auto& [key, num] = *groups.begin();
        std::vector<DenFactor> fs;
        for (const auto& [b, e] : key) fs.push_back({b, e});
        return RatFunc::from_factors(num, std::move(fs));
    }
    if (!linear) {
        RatFunc acc(nvars);
        for (const auto& [key, num] : groups) {
            std::vector<DenFactor> fs;
            for (const auto& [b, e] : key) fs.push_back({b, e});
            RatFunc t = RatFunc::from_factors(num, std::move(fs));
            Poly n = acc.num() * t.den() + t.num() * acc.den();
            auto all = acc.den_factors();
            all.insert(all.end(), t.den_factors().begin(), t.den_factors().end());
            acc = RatFunc::from_factors(std::move(n), std::move(all));
        }
        return acc;
    }
    // Linear bases are pairwise coprime whenever distinct: lcm = max exponents.
    std::map<Poly, int> lcm;
    for (const auto& [key, num] : groups)
        for (const auto& [b, e] : key) {
            int& slot = lcm[b];
            slot = std::max(slot, e);
        }
    std::map<std::pair<Poly, int>, Poly> power_cache;
    auto power = [&](const Poly& b, int e) -> const Poly& {
        auto [it, inserted] = power_cache.try_emplace({b, e}, Poly(nvars));
        if (inserted) it->second = b.pow(static_cast<unsigned>(e));
        return it->second;
    };
    Poly total(nvars);
    for (const auto& [key, num] : groups) {
        if (num.is_zero()) continue;
        Poly cof = Poly::constant(nvars, 1);
        for (const auto& [b, e] : lcm) {
            int have = 0;
            for (const auto& [kb, ke] : key)
                if (kb == b) have = ke;
            if (e > have) cof = cof * power(b, e - have);
        }
        total += num * cof;
    }
    std::vector<DenFactor> fs;
    for (const auto& [b, e] : lcm) fs.push_back({b, e});
    return RatFunc::from_factors(std::move(total), std::move(fs));
}

}  // namespace invsq
