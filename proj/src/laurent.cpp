#include "invsq/laurent.hpp"

#include <algorithm>

namespace invsq {

LinearForm::LinearForm(std::vector<BigRat> c) : coeffs(std::move(c)) {
    if (std::all_of(coeffs.begin(), coeffs.end(), [](const BigRat& x) { return sgn(x) == 0; }))
        throw InvalidInput("linear form with all coefficients zero");
}

Poly LinearForm::as_poly(int nvars) const {
    if (nvars < dim()) throw InvalidInput("linear form has more coefficients than variables");
    return Poly::linear(nvars, coeffs);
}

Frame complete_frame(std::span<const BigRat> alpha) {
    int n = static_cast<int>(alpha.size());
    LinearForm check{{alpha.begin(), alpha.end()}};
    std::vector<std::vector<BigRat>> rows{check.coeffs};
    std::vector<BigRat> gram{dot(alpha, alpha)};
    for (int i = 0; i < n && static_cast<int>(rows.size()) < n; ++i) {
        std::vector<BigRat> v(static_cast<std::size_t>(n));
        v[static_cast<std::size_t>(i)] = 1;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            BigRat f = dot(v, rows[r]) / gram[r];
            for (int j = 0; j < n; ++j) v[static_cast<std::size_t>(j)] -= f * rows[r][static_cast<std::size_t>(j)];
        }
        if (std::all_of(v.begin(), v.end(), [](const BigRat& x) { return sgn(x) == 0; })) continue;
        // Rescale to a primitive integer vector.
        BigInt l = 1, g = 0;
        for (const auto& x : v) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), x.get_den_mpz_t());
        for (auto& x : v) {
            x *= l;
            mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), x.get_num_mpz_t());
        }
        for (auto& x : v) x /= g;
        gram.push_back(dot(v, v));
        rows.push_back(std::move(v));
    }
    Frame fr;
    fr.rows = Matrix::from_rows(rows);
    fr.gram = std::move(gram);
    fr.to_x = fr.rows.inverse();
    return fr;
}

RatFunc substitute_linear(const RatFunc& f, const Matrix& A) {
    if (A.rows() != A.cols()) throw InvalidInput("substitution matrix must be square");
    if (A.rows() > f.nvars()) throw InvalidInput("substitution matrix larger than variable count");
    if (sgn(A.determinant()) == 0) throw MathError("singular substitution matrix");
    int n = f.nvars();
    std::vector<Poly> images;
    images.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        if (i < A.rows()) {
            auto r = A.row(i);
            images.push_back(Poly::linear(n, r));
        } else {
            images.push_back(Poly::variable(n, i));
        }
    }
    return f.substitute(images);
}

RatFunc LaurentSlice::coeff(int k) const {
    if (k > k_max) throw InvalidInput("Laurent coefficient beyond the computed range");
    auto it = coeffs.find(k);
    return it != coeffs.end() ? it->second : RatFunc(nvars);
}

namespace {

Poly value_at_zero(const Poly& p, int var) {
    auto cs = p.coefficients_in(var);
    return cs.empty() ? Poly(p.nvars()) : cs[0];
}

}  // namespace

int order_in_var(const RatFunc& f, int var) {
    if (f.is_zero()) throw InvalidInput("order of the zero function");
    int e = 0;
    for (const auto& d : f.den_factors())
        if (d.base == Poly::variable(f.nvars(), var)) e = d.exp;
    return e - f.num().min_degree_in(var);
}

LaurentSlice laurent_in_var(const RatFunc& f, int var, std::optional<int> k_max) {
    int n = f.nvars();
    if (var < 0 || var >= n) throw InvalidInput("expansion variable out of range");
    LaurentSlice s;
    s.var = var;
    s.nvars = n;
    std::vector<BigRat> unit(static_cast<std::size_t>(n));
    unit[static_cast<std::size_t>(var)] = 1;
    s.form = LinearForm(unit);
    if (f.is_zero()) {
        s.k_max = k_max.value_or(0);
        s.min_order = s.k_max + 1;
        return s;
    }
    Poly xv = Poly::variable(n, var);
    int e = 0;
    Poly D = Poly::constant(n, 1);
    std::vector<DenFactor> d0;
    for (const auto& fac : f.den_factors()) {
        if (fac.base == xv) {
            e = fac.exp;
            continue;
        }
        D = D * fac.base.pow(static_cast<unsigned>(fac.exp));
        Poly z = value_at_zero(fac.base, var);
        if (z.is_zero()) throw MathError("denominator vanishes identically on the hyperplane");
        d0.push_back({std::move(z), fac.exp});
    }
    auto Nc = f.num().coefficients_in(var);
    auto Dc = D.coefficients_in(var);
    int min_order = f.num().min_degree_in(var) - e;
    int kmax = k_max.value_or(min_order + 4);
    s.min_order = min_order;
    s.k_max = kmax;
    if (kmax < min_order) return s;
    int K = kmax + e;  // highest combined index needed
    Poly D0 = Dc[0];
    std::vector<Poly> d0pow{Poly::constant(n, 1)};
    for (int i = 1; i <= K; ++i) d0pow.push_back(d0pow.back() * D0);
    auto Di = [&](int i) { return i < static_cast<int>(Dc.size()) ? Dc[static_cast<std::size_t>(i)] : Poly(n); };
    auto Na = [&](int a) { return a < static_cast<int>(Nc.size()) ? Nc[static_cast<std::size_t>(a)] : Poly(n); };
    // 1/D = sum_j t_j / D0^(j+1) var^j
    std::vector<Poly> t{Poly::constant(n, 1)};
    for (int j = 1; j <= K; ++j) {
        Poly acc(n);
        for (int i = 1; i <= j; ++i) {
            Poly di = Di(i);
            if (di.is_zero()) continue;
            acc -= di * t[static_cast<std::size_t>(j - i)] * d0pow[static_cast<std::size_t>(i - 1)];
        }
        t.push_back(std::move(acc));
    }
    for (int k = min_order; k <= kmax; ++k) {
        int kk = k + e;
        Poly num(n);
        for (int a = 0; a <= kk; ++a) {
            Poly na = Na(a);
            if (na.is_zero()) continue;
            int b = kk - a;
            num += na * t[static_cast<std::size_t>(b)] * d0pow[static_cast<std::size_t>(kk - b)];
        }
        if (num.is_zero()) continue;
        std::vector<DenFactor> den = d0;
        for (auto& d : den) d.exp *= kk + 1;
        s.coeffs.emplace(k, RatFunc::from_factors(std::move(num), std::move(den)));
    }
    return s;
}

LaurentSlice laurent_along(const RatFunc& f, const LinearForm& l, std::optional<int> k_max) {
    Frame fr = complete_frame(l.coeffs);
    RatFunc g = substitute_linear(f, fr.to_x);
    LaurentSlice s = laurent_in_var(g, 0, k_max);
    s.form = l;
    s.frame = std::move(fr);
    return s;
}

}  // namespace invsq
