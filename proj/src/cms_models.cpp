#include "invsq/cms_models.hpp"

#include "invsq/laurent.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace invsq {

namespace {

using Vec = std::vector<BigRat>;

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

int nonzero_count(const RootVector& r) {
    return static_cast<int>(std::count_if(r.coords.begin(), r.coords.end(), [](const BigRat& c) { return sgn(c) != 0; }));
}

Poly coord(int nv, int i) { return Poly::variable(nv, i); }

// C / f^2 for a linear form f.
RatFunc inv_square(const Poly& f, const RatFunc& C) {
    if (C.is_zero()) return RatFunc(f.nvars());
    return C * RatFunc::inverse_power(f, 2);
}

// Linear algebra for the a0 ansatz runs modulo a 61-bit prime; the candidate is
// lifted by rational reconstruction and then checked exactly by the caller.
constexpr std::uint64_t kPrime = (std::uint64_t{1} << 61) - 1;

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b) {
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % kPrime);
}

std::uint64_t powmod(std::uint64_t a, std::uint64_t e) {
    std::uint64_t r = 1;
    for (; e; e >>= 1, a = mulmod(a, a))
        if (e & 1) r = mulmod(r, a);
    return r;
}

std::uint64_t invmod(std::uint64_t a) { return powmod(a, kPrime - 2); }

std::optional<std::uint64_t> to_mod(const BigRat& q) {
    std::uint64_t d = mpz_fdiv_ui(q.get_den_mpz_t(), kPrime);
    if (d == 0) return std::nullopt;
    return mulmod(mpz_fdiv_ui(q.get_num_mpz_t(), kPrime), invmod(d));
}

// Smallest a/b with a = b * r (mod p), |a|, b below sqrt(p / 2).
std::optional<BigRat> reconstruct(std::uint64_t r) {
    BigInt p(std::to_string(kPrime), 10);
    BigInt bound = sqrt(p / 2);
    BigInt r0 = p, r1(std::to_string(r), 10), t0 = 0, t1 = 1;
    while (r1 > bound) {
        BigInt q = r0 / r1;
        BigInt r2 = r0 - q * r1, t2 = t0 - q * t1;
        r0 = r1, r1 = r2, t0 = t1, t1 = t2;
    }
    if (t1 == 0 || abs(t1) > bound) return std::nullopt;
    BigRat out(r1, t1);
    out.canonicalize();
    return out;
}

// Row reduction of [M | rhs] mod p. Free unknowns are set to zero; nullopt when inconsistent.
std::optional<std::vector<std::uint64_t>> solve_mod(std::vector<std::vector<std::uint64_t>> rows, int nunk) {
    int r = 0;
    std::vector<int> pivots;
    for (int c = 0; c < nunk && r < static_cast<int>(rows.size()); ++c) {
        int p = -1;
        for (int i = r; i < static_cast<int>(rows.size()); ++i)
            if (rows[idx(i)][idx(c)] != 0) {
                p = i;
                break;
            }
        if (p < 0) continue;
        std::swap(rows[idx(p)], rows[idx(r)]);
        std::uint64_t inv = invmod(rows[idx(r)][idx(c)]);
        for (auto& v : rows[idx(r)]) v = mulmod(v, inv);
        for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
            std::uint64_t f = rows[idx(i)][idx(c)];
            if (i == r || f == 0) continue;
            for (int j = c; j <= nunk; ++j)
                rows[idx(i)][idx(j)] = (rows[idx(i)][idx(j)] + kPrime - mulmod(f, rows[idx(r)][idx(j)])) % kPrime;
        }
        pivots.push_back(c);
        ++r;
    }
    for (int i = r; i < static_cast<int>(rows.size()); ++i)
        if (rows[idx(i)][idx(nunk)] != 0) return std::nullopt;
    std::vector<std::uint64_t> sol(idx(nunk));
    for (int i = 0; i < r; ++i) sol[idx(pivots[idx(i)])] = rows[idx(i)][idx(nunk)];
    return sol;
}

// All monomials of total degree <= d in nparams variables starting at offset, embedded in nv vars.
std::vector<Poly> param_monomials(int nv, int offset, int nparams, int d) {
    std::vector<Poly> out{Poly::constant(nv, 1)};
    std::vector<Poly> layer{Poly::constant(nv, 1)};
    std::vector<int> last{0};  // smallest parameter allowed next, to avoid repeats
    for (int deg = 1; deg <= d; ++deg) {
        std::vector<Poly> next;
        std::vector<int> next_last;
        for (std::size_t k = 0; k < layer.size(); ++k)
            for (int p = last[k]; p < nparams; ++p) {
                next.push_back(layer[k] * coord(nv, offset + p));
                next_last.push_back(p);
            }
        out.insert(out.end(), next.begin(), next.end());
        layer = std::move(next);
        last = std::move(next_last);
    }
    return out;
}

// Solves grad a0 = half * (coefficient of d_i in G) over the finite ansatz.
RatFunc integrate_a0(const DiffOp& G, int n, int np, bool coordinate_factors) {
    int nv = n + np;
    std::vector<std::string> unmatched;
    for (const auto& [p, c] : G.terms())
        if (p.degree() >= 2) unmatched.push_back("order " + std::to_string(p.degree()) + ": " + c.to_string());
    if (!unmatched.empty()) throw IntegrationError("[L, P] has terms of order >= 2", unmatched);

    std::vector<RatFunc> target;
    for (int i = 0; i < n; ++i) target.push_back(G.coeff(Monomial::var(i)) * BigRat(1, 2));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (!(target[idx(i)].derivative(j) == target[idx(j)].derivative(i)))
                unmatched.push_back("d" + std::to_string(j + 1) + "G" + std::to_string(i + 1) + " != d" +
                                    std::to_string(i + 1) + "G" + std::to_string(j + 1));
    if (!unmatched.empty()) throw IntegrationError("gradient field is not closed", unmatched);
    if (std::all_of(target.begin(), target.end(), [](const RatFunc& f) { return f.is_zero(); }))
        return RatFunc(nv);

    std::vector<Poly> factors;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            factors.push_back(coord(nv, i) - coord(nv, j));
            factors.push_back(coord(nv, i) + coord(nv, j));
        }
    if (coordinate_factors)
        for (int i = 0; i < n; ++i) factors.push_back(coord(nv, i));

    std::vector<RatFunc> shapes;
    for (std::size_t a = 0; a < factors.size(); ++a) {
        shapes.push_back(RatFunc::inverse_power(factors[a], 2));
        for (std::size_t b = a; b < factors.size(); ++b)
            shapes.push_back(RatFunc::from_factors(Poly::constant(nv, 1), {{factors[a], 2}, {factors[b], 2}}));
    }
    std::vector<Poly> mus = param_monomials(nv, n, np, 2);
    int nunk = static_cast<int>(shapes.size() * mus.size());

    std::vector<std::vector<RatFunc>> grads(shapes.size());
    for (std::size_t s = 0; s < shapes.size(); ++s)
        for (int i = 0; i < n; ++i) grads[s].push_back(shapes[s].derivative(i));

    std::mt19937 rng(20240611u);
    std::uniform_int_distribution<int> num(-40, 40);
    std::uniform_int_distribution<int> den(1, 9);
    auto random_point = [&] {
        for (;;) {
            Vec pt(idx(nv));
            for (auto& v : pt) {
                v = BigRat(num(rng), den(rng));
                v.canonicalize();
            }
            bool ok = std::all_of(factors.begin(), factors.end(), [&](const Poly& f) { return sgn(f.evaluate(pt)) != 0; });
            for (int k = n; k < nv; ++k) ok = ok && sgn(pt[idx(k)]) != 0;
            if (ok) return pt;
        }
    };

    std::vector<std::vector<std::uint64_t>> rows;
    int npoints = (nunk + 8) / n + 2;
    for (int q = 0; q < npoints; ++q) {
        Vec pt = random_point();
        Vec muv;
        for (const auto& mu : mus) muv.push_back(mu.evaluate(pt));
        for (int i = 0; i < n; ++i) {
            std::vector<std::uint64_t> row(idx(nunk + 1));
            bool ok = true;
            for (std::size_t s = 0; s < shapes.size() && ok; ++s) {
                BigRat g = grads[s][idx(i)].evaluate(pt);
                for (std::size_t m = 0; m < mus.size() && ok; ++m) {
                    auto v = to_mod(g * muv[m]);
                    ok = v.has_value();
                    if (ok) row[s * mus.size() + m] = *v;
                }
            }
            auto rhs = to_mod(target[idx(i)].evaluate(pt));
            if (!ok || !rhs) continue;
            row[idx(nunk)] = *rhs;
            rows.push_back(std::move(row));
        }
    }
    auto modsol = solve_mod(std::move(rows), nunk);
    if (!modsol) throw IntegrationError("ansatz for a0 does not close", {"inconsistent sampled system"});
    Vec sol;
    for (std::uint64_t v : *modsol) {
        auto q = reconstruct(v);
        if (!q) throw IntegrationError("ansatz for a0 does not close", {"coefficient reconstruction failed"});
        sol.push_back(*q);
    }

    std::vector<RatFunc> parts;
    for (std::size_t s = 0; s < shapes.size(); ++s)
        for (std::size_t m = 0; m < mus.size(); ++m) {
            const BigRat& lam = sol[s * mus.size() + m];
            if (sgn(lam) != 0) parts.push_back(shapes[s] * RatFunc(mus[m] * lam));
        }
    RatFunc a0 = sum(parts, nv);
    for (int i = 0; i < n; ++i) {
        RatFunc diff = a0.derivative(i) - target[idx(i)];
        if (!diff.is_zero()) unmatched.push_back("d" + std::to_string(i + 1) + " a0: " + diff.to_string());
    }
    if (!unmatched.empty()) throw IntegrationError("ansatz for a0 does not close", unmatched);
    return a0;
}

std::string pair_name(const char* prefix, int i, int j, int n) {
    std::string sep = n >= 10 ? "_" : "";
    return prefix + std::to_string(i + 1) + sep + std::to_string(j + 1);
}

}  // namespace

std::vector<std::string> PotentialSpec::parameter_names() const {
    std::vector<std::string> out;
    if (kind == Kind::wp_series) return out;
    if (m) return out;
    if (!C) out.push_back("C");
    if (!C0) out.push_back("C0");
    return out;
}

RatFunc PotentialSpec::coupling(const RootVector& r, int n) const {
    auto names = parameter_names();
    int nv = n + static_cast<int>(names.size());
    if (m) return RatFunc::constant(nv, BigRat(*m * (*m + 1)) * r.squared_norm);
    bool coordinate_root = nonzero_count(r) == 1;
    const auto& value = coordinate_root ? C0 : C;
    if (value) return RatFunc::constant(nv, *value);
    std::string want = coordinate_root ? "C0" : "C";
    auto it = std::find(names.begin(), names.end(), want);
    return RatFunc::variable(nv, n + static_cast<int>(it - names.begin()));
}

DiffOp build_L(const Arrangement& arr, const PotentialSpec& spec) {
    if (spec.kind != PotentialSpec::Kind::rational)
        throw InvalidInput("series potentials are not supported for operator builds");
    int n = arr.nvars();
    int np = spec.nparams();
    int nv = n + np;
    DiffOp L = -DiffOp::laplacian(n, np);
    std::vector<RatFunc> pot;
    for (const auto& r : arr.roots()) {
        RatFunc c = spec.coupling(r, n);
        if (!c.is_zero()) pot.push_back(inv_square(Poly::linear(nv, r.coords), c));
    }
    if (!pot.empty()) L += DiffOp::scalar(n, sum(pot, nv)).with_params(np);
    return L;
}

DiffOp build_L(const Arrangement& arr) {
    int n = arr.nvars();
    DiffOp L = -DiffOp::laplacian(n);
    std::vector<RatFunc> pot;
    for (std::size_t k = 0; k < arr.size(); ++k) {
        const auto& c = arr.couplings()[k];
        if (!c) throw InvalidInput("build_L needs every coupling to be known");
        pot.push_back(inv_square(Poly::linear(n, arr.roots()[k].coords), RatFunc::constant(n, *c)));
    }
    if (!pot.empty()) L += DiffOp::scalar(n, sum(pot, n));
    return L;
}

DiffOp build_P_typeA(int n, const PotentialSpec& spec) {
    if (n < 3) throw InvalidInput("type A commutant needs n >= 3");
    if (spec.kind != PotentialSpec::Kind::rational)
        throw InvalidInput("series potentials are not supported for operator builds");
    int np = spec.nparams();
    int nv = n + np;
    DiffOp P(n, np);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int k = j + 1; k < n; ++k) {
                std::vector<int> p(idx(n));
                p[idx(i)] = p[idx(j)] = p[idx(k)] = 1;
                P += DiffOp::term(n, np, p, RatFunc::constant(nv, 1));
            }
    for (int i = 0; i < n; ++i) {
        std::vector<RatFunc> parts;
        for (int j = 0; j < n; ++j)
            for (int k = j + 1; k < n; ++k) {
                if (j == i || k == i) continue;
                Vec a(idx(n));
                a[idx(j)] = 1;
                a[idx(k)] = -1;
                RootVector r(a);
                parts.push_back(inv_square(Poly::linear(nv, a), spec.coupling(r, n)) * BigRat(1, 2));
            }
        RatFunc a1 = sum(parts, nv);
        if (!a1.is_zero()) P += DiffOp::term(n, Monomial::var(i), a1).with_params(np);
    }
    return P;
}

DiffOp build_P_typeBD(int n, const PotentialSpec& spec, RootType type) {
    if (type == RootType::A) throw InvalidInput("build_P_typeBD expects type B or D");
    if (spec.kind != PotentialSpec::Kind::rational)
        throw InvalidInput("series potentials are not supported for operator builds");
    if (type == RootType::B && n < 2) throw InvalidInput("type B commutant needs n >= 2");
    if (type == RootType::D && n < 3) throw InvalidInput("type D commutant needs n >= 3");
    if (type == RootType::D && !spec.m && (!spec.C0 || sgn(*spec.C0) != 0))
        throw InvalidInput("type D requires C0 = 0");
    int np = spec.nparams();
    int nv = n + np;
    auto root = [n](int i, int j, int sj) {
        Vec a(idx(n));
        a[idx(i)] = 1;
        if (j >= 0) a[idx(j)] = sj;
        return RootVector(a);
    };
    // u(x_i + s x_j) and v(x_i) as functions.
    auto u = [&](int i, int j, int s) {
        RootVector r = root(i, j, s);
        return inv_square(Poly::linear(nv, r.coords), spec.coupling(r, n));
    };
    auto v = [&](int i) {
        if (type == RootType::D) return RatFunc(nv);
        RootVector r = root(i, -1, 0);
        return inv_square(coord(nv, i), spec.coupling(r, n));
    };

    std::vector<RatFunc> a2(idx(n), RatFunc(nv));
    for (int i = 0; i < n; ++i) {
        std::vector<RatFunc> parts;
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            for (int k = j + 1; k < n; ++k) {
                if (k == i) continue;
                parts.push_back(-u(j, k, 1));
                parts.push_back(-u(j, k, -1));
            }
            parts.push_back(-v(j));
        }
        a2[idx(i)] = sum(parts, nv);
    }
    std::vector<std::vector<RatFunc>> a11(idx(n), std::vector<RatFunc>(idx(n), RatFunc(nv)));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) a11[idx(i)][idx(j)] = a11[idx(j)][idx(i)] = u(i, j, -1) - u(i, j, 1);

    DiffOp P(n, np);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            std::vector<int> p(idx(n));
            p[idx(i)] = p[idx(j)] = 2;
            P += DiffOp::term(n, np, p, RatFunc::constant(nv, 1));
            std::fill(p.begin(), p.end(), 0);
            p[idx(i)] = p[idx(j)] = 1;
            if (!a11[idx(i)][idx(j)].is_zero()) P += DiffOp::term(n, np, p, a11[idx(i)][idx(j)]);
        }
    for (int i = 0; i < n; ++i) {
        if (!a2[idx(i)].is_zero()) P += DiffOp::term(n, Monomial::var(i, 2), a2[idx(i)]).with_params(np);
        std::vector<RatFunc> parts{a2[idx(i)].derivative(i)};
        for (int j = 0; j < n; ++j)
            if (j != i) parts.push_back(a11[idx(i)][idx(j)].derivative(j) * BigRat(1, 2));
        RatFunc a1 = sum(parts, nv);
        if (!a1.is_zero()) P += DiffOp::term(n, Monomial::var(i), a1).with_params(np);
    }

    Arrangement arr = positive_system(type, n);
    DiffOp L = build_L(arr, spec);
    DiffOp G = commutator(L, P);
    bool coordinate_factors = type == RootType::B && !(spec.C0 && sgn(*spec.C0) == 0 && !spec.m);
    RatFunc a0 = integrate_a0(G, n, np, coordinate_factors);
    if (!a0.is_zero()) P += DiffOp::scalar(n, a0).with_params(np);
    return P;
}

CommutantReport verify_commutant(const DiffOp& L, const DiffOp& P) {
    CommutantReport rep;
    rep.ndiff = L.ndiff();
    DiffOp c = commutator(L, P);
    int top = P.order();
    for (const auto& [p, coeff] : c.terms()) rep.residual_by_grade[top - p.degree()].emplace_back(p, coeff);
    rep.zero = rep.residual_by_grade.empty();
    return rep;
}

WpSeries wp_series(int N) {
    if (N < 2) throw InvalidInput("wp series needs N >= 2");
    WpSeries s;
    s.N = N;
    s.c.assign(idx(N + 1), Poly(2));
    s.c[2] = Poly::variable(2, 0) * BigRat(1, 20);
    if (N >= 3) s.c[3] = Poly::variable(2, 1) * BigRat(1, 28);
    for (int k = 4; k <= N; ++k) {
        Poly acc(2);
        for (int m = 2; m <= k - 2; ++m) acc += s.c[idx(m)] * s.c[idx(k - m)];
        BigRat f(3, (2 * k + 1) * (k - 3));
        f.canonicalize();
        s.c[idx(k)] = acc * f;
    }
    // The truncation error of the differential equation first appears at t^(2N-4).
    auto res = wp_ode_residual(s);
    if (!res.empty() && res.begin()->first < 2 * N - 4)
        throw std::logic_error("wp series recursion violates the differential equation");
    return s;
}

std::map<int, Poly> WpSeries::laurent() const {
    std::map<int, Poly> out;
    out.emplace(-2, Poly::constant(2, 1));
    for (int k = 2; k <= N; ++k)
        if (!c[idx(k)].is_zero()) out.emplace(2 * k - 2, c[idx(k)]);
    return out;
}

namespace {

using Series = std::map<int, Poly>;

Series series_mul(const Series& a, const Series& b) {
    Series out;
    for (const auto& [ea, ca] : a)
        for (const auto& [eb, cb] : b) {
            auto [it, fresh] = out.try_emplace(ea + eb, Poly(2));
            it->second += ca * cb;
        }
    for (auto it = out.begin(); it != out.end();) it = it->second.is_zero() ? out.erase(it) : std::next(it);
    return out;
}

void series_add(Series& a, const Series& b, const BigRat& f) {
    for (const auto& [e, c] : b) {
        auto [it, fresh] = a.try_emplace(e, Poly(2));
        it->second += c * f;
    }
    for (auto it = a.begin(); it != a.end();) it = it->second.is_zero() ? a.erase(it) : std::next(it);
}

}  // namespace

std::map<int, Poly> wp_ode_residual(const WpSeries& s) {
    Series wp = s.laurent();
    Series dwp;
    for (const auto& [e, c] : wp) dwp.emplace(e - 1, c * BigRat(e));
    Series out = series_mul(dwp, dwp);
    series_add(out, series_mul(wp, series_mul(wp, wp)), -4);
    Poly g2 = Poly::variable(2, 0);
    Series g2wp;
    for (const auto& [e, c] : wp) g2wp.emplace(e, c * g2);
    series_add(out, g2wp, 1);
    series_add(out, Series{{0, Poly::variable(2, 1)}}, 1);
    return out;
}

A7Result functional_eq_A7_check(int n, const RatFunc& u) {
    if (n < 3) throw InvalidInput("the functional equation needs n >= 3");
    int np = u.nvars() - 1;
    if (np < 0) throw InvalidInput("u must be a function of one variable");
    int nv = n + np;
    RatFunc du = u.derivative(0);
    auto at = [&](const RatFunc& f, int a, int b) {
        std::vector<Poly> images{coord(nv, a) - coord(nv, b)};
        for (int k = 0; k < np; ++k) images.push_back(coord(nv, n + k));
        return f.substitute(images);
    };
    // u_pq(x_p - x_q) with u_qp(t) = u_pq(-t).
    auto U = [&](int p, int q) { return at(u, std::min(p, q), std::max(p, q)); };
    std::vector<RatFunc> terms;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            RatFunc d = at(du, i, j);
            for (int p = 0; p < n; ++p) {
                if (p == i || p == j) continue;
                terms.push_back((U(p, j) - U(p, i)) * d);
            }
        }
    RatFunc lhs = sum(terms, nv);
    A7Result r;
    r.vanishes = lhs.is_zero();
    if (!r.vanishes) {
        Vec l(idx(n));
        l[0] = 1;
        l[1] = -1;
        r.first_failing_order = laurent_along(lhs, LinearForm(l)).min_order;
    }
    return r;
}

A7Result functional_eq_A7_check(int n, const PotentialSpec& spec) {
    if (n < 3) throw InvalidInput("the functional equation needs n >= 3");
    if (spec.kind == PotentialSpec::Kind::rational) {
        int np = spec.nparams();
        Vec a(idx(n));
        a[0] = 1;
        a[1] = -1;
        RatFunc C = spec.coupling(RootVector(a), n);
        // Move the coupling from n + np variables to 1 + np.
        std::vector<Poly> images(idx(n), Poly(1 + np));
        for (int k = 0; k < np; ++k) images.push_back(Poly::variable(1 + np, 1 + k));
        RatFunc c1 = C.substitute(images);
        return functional_eq_A7_check(n, c1 * RatFunc::variable(1 + np, 0).pow(-2));
    }

    // Series: variables x_1..x_n, g2, g3. Piece of x-degree d of u and u'.
    int N = spec.N;
    WpSeries s = wp_series(N);
    int nv = n + 2;
    std::map<int, Poly> ucoef;  // t-power -> coefficient in (g2, g3) embedded in nv vars
    std::vector<Poly> gvals{spec.g2 ? Poly::constant(2, *spec.g2) : Poly::variable(2, 0),
                            spec.g3 ? Poly::constant(2, *spec.g3) : Poly::variable(2, 1)};
    for (const auto& [e, c] : s.laurent()) {
        Poly v = c.substitute(gvals);
        if (!v.is_zero()) ucoef.emplace(e, v.embed(nv, n) * spec.c1);
    }
    if (sgn(spec.c2) != 0) {
        auto [it, fresh] = ucoef.try_emplace(0, Poly(nv));
        it->second += Poly::constant(nv, spec.c2);
    }
    std::map<int, Poly> ducoef;
    for (const auto& [e, c] : ucoef)
        if (e != 0 && !c.is_zero()) ducoef.emplace(e - 1, c * BigRat(e));
    auto piece = [&](const Poly& c, int e, int a, int b) {
        Poly t = coord(nv, a) - coord(nv, b);
        if (e >= 0) return RatFunc(c * t.pow(static_cast<unsigned>(e)));
        return RatFunc(c) * RatFunc::inverse_power(t, -e);
    };
    auto U = [&](const Poly& c, int e, int p, int q) { return piece(c, e, std::min(p, q), std::max(p, q)); };

    A7Result r;
    r.vanishes = true;
    if (ducoef.empty()) return r;  // constant u
    int lowest = ucoef.begin()->first + ducoef.begin()->first;
    for (int d = lowest; d <= 2 * N - 5; d += 2) {
        std::vector<RatFunc> terms;
        for (const auto& [eu, cu] : ucoef) {
            auto it = ducoef.find(d - eu);
            if (it == ducoef.end()) continue;
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) {
                    RatFunc dpart = piece(it->second, it->first, i, j);
                    for (int p = 0; p < n; ++p) {
                        if (p == i || p == j) continue;
                        terms.push_back((U(cu, eu, p, j) - U(cu, eu, p, i)) * dpart);
                    }
                }
        }
        r.checked_degrees.push_back(d);
        if (!sum(terms, nv).is_zero()) {
            r.vanishes = false;
            r.first_failing_order = d;
            break;
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Coupling constraints and classification

int ConstraintSystem::index_of(const std::string& name) const {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw InvalidInput("unknown coupling '" + name + "'");
    return static_cast<int>(it - names.begin());
}

std::string ConstraintSystem::equation_string(const Equation& e) const {
    return names[idx(e.factor)] + "*(" + names[idx(e.plus)] + " - " + names[idx(e.minus)] + ") = 0";
}

namespace {

RootType infer_type(const Arrangement& arr) {
    bool coord_root = false;
    bool plus_root = false;
    for (const auto& r : arr.roots()) {
        int nz = nonzero_count(r);
        if (nz == 1) coord_root = true;
        if (nz == 2) {
            std::vector<BigRat> v;
            for (const auto& c : r.coords)
                if (sgn(c) != 0) v.push_back(c);
            if (v[0] == v[1]) plus_root = true;
        }
    }
    if (coord_root) return RootType::B;
    if (plus_root) return arr.nvars() >= 3 ? RootType::D : RootType::B;
    return RootType::A;
}

}  // namespace

ConstraintSystem residue_constraints(const Arrangement& arr, std::optional<RootType> type) {
    int n = arr.nvars();
    if (n < 2) throw InvalidInput("constraint systems need n >= 2");
    ConstraintSystem cs;
    cs.type = type ? *type : infer_type(arr);
    cs.n = n;
    Arrangement full = positive_system(cs.type, n);
    cs.roots = full.roots();
    for (const auto& r : cs.roots) {
        std::vector<int> nz;
        for (int i = 0; i < n; ++i)
            if (sgn(r.coords[idx(i)]) != 0) nz.push_back(i);
        if (nz.size() == 1)
            cs.names.push_back("C" + std::to_string(nz[0] + 1));
        else if (cs.type == RootType::A)
            cs.names.push_back(pair_name("C", nz[0], nz[1], n));
        else
            cs.names.push_back(pair_name(sgn(r.coords[idx(nz[1])]) < 0 ? "Cm" : "Cp", nz[0], nz[1], n));
    }
    for (const auto& r : arr.roots())
        if (!full.find(r)) throw InvalidInput("root " + r.to_string() + " is not in the " + to_string(cs.type) + " positive system");

    auto pair_idx = [&](int i, int j, int s) {
        Vec a(idx(n));
        a[idx(std::min(i, j))] = 1;
        // e_i - e_j and e_j - e_i are the same line.
        a[idx(std::max(i, j))] = s;
        return static_cast<int>(*full.find(RootVector(a)));
    };
    auto coord_idx = [&](int i) {
        Vec a(idx(n));
        a[idx(i)] = 1;
        return static_cast<int>(*full.find(RootVector(a)));
    };
    std::set<std::tuple<int, int, int>> seen;
    auto add = [&](int f, int p, int m, const char* family) {
        if (p == m) return;
        if (!seen.insert({f, std::min(p, m), std::max(p, m)}).second) return;
        cs.equations.push_back({f, p, m, family});
    };

    if (cs.type == RootType::A) {
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    if (k != i && k != j) add(pair_idx(i, j, -1), pair_idx(k, i, -1), pair_idx(k, j, -1), "pairs");
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) cs.normalization.emplace_back(pair_name("p_", i, j, n), 0);
        for (int i = 0; i < n; ++i) cs.normalization.emplace_back("q_" + std::to_string(i + 1), 0);
        return cs;
    }

    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            for (int k = 0; k < n; ++k) {
                if (k == i || k == j) continue;
                for (int s : {1, -1}) {
                    add(pair_idx(i, j, -1), pair_idx(i, k, s), pair_idx(j, k, s), "minus");
                    add(pair_idx(i, j, 1), pair_idx(i, k, s), pair_idx(j, k, -s), "plus");
                }
            }
        }
    if (cs.type == RootType::B) {
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                for (int s : {-1, 1}) add(pair_idx(i, j, s), coord_idx(i), coord_idx(j), "pair-coordinate");
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j) add(coord_idx(i), pair_idx(i, j, 1), pair_idx(i, j, -1), "coordinate-pair");
    }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) cs.normalization.emplace_back(pair_name("p_", i, j, n), 0);
    for (int i = 0; i < n; ++i) cs.normalization.emplace_back("delta_" + std::to_string(i + 1), 0);
    return cs;
}

std::vector<Seed> seeds_from_arrangement(const ConstraintSystem& cs, const Arrangement& arr) {
    std::vector<Seed> out;
    std::vector<std::pair<int, BigRat>> known;
    for (std::size_t k = 0; k < arr.size(); ++k) {
        const auto& r = arr.roots()[k];
        int u = -1;
        for (std::size_t q = 0; q < cs.roots.size(); ++q)
            if (cs.roots[q].parallel_to(r)) u = static_cast<int>(q);
        if (u < 0) throw InvalidInput("root " + r.to_string() + " is not part of the constraint system");
        out.push_back({Seed::Kind::nonzero, cs.names[idx(u)], ""});
        if (const auto& c = arr.couplings()[k]) {
            // Coupling relative to the standard root of the line.
            BigRat scaled = *c * cs.roots[idx(u)].squared_norm / r.squared_norm;
            known.emplace_back(u, scaled);
        }
    }
    for (std::size_t a = 0; a < known.size(); ++a)
        for (std::size_t b = a + 1; b < known.size(); ++b)
            out.push_back({known[a].second == known[b].second ? Seed::Kind::equals : Seed::Kind::differs,
                           cs.names[idx(known[a].first)], cs.names[idx(known[b].first)]});
    return out;
}

const char* to_string(Verdict::Kind k) {
    switch (k) {
        case Verdict::Kind::full_positive_system: return "full_positive_system";
        case Verdict::Kind::d_inside_b: return "d_inside_b";
        case Verdict::Kind::contradicts_w: return "contradicts_w";
        case Verdict::Kind::fails_I2: return "fails_I2";
        case Verdict::Kind::contradiction: return "contradiction";
        case Verdict::Kind::ambiguous: return "ambiguous";
    }
    return "?";
}

std::string Verdict::to_string() const {
    std::string s = invsq::to_string(kind);
    if (!label.empty()) s += " (" + label + ")";
    return s;
}

namespace {

// Union-find over the unknowns plus a ZERO node, with nonzero flags and
// disequalities between classes.
class Closure {
public:
    explicit Closure(int m) : parent_(idx(m + 1)), nonzero_(idx(m + 1)), zero_(m) {
        std::iota(parent_.begin(), parent_.end(), 0);
    }

    int find(int a) const {
        while (parent_[idx(a)] != a) a = parent_[idx(a)];
        return a;
    }
    int zero() const { return zero_; }
    bool is_zero(int a) const { return find(a) == find(zero_); }
    bool is_nonzero(int a) const { return nonzero_[idx(find(a))]; }
    bool differ(int a, int b) const {
        int ra = find(a), rb = find(b);
        if (ra == rb) return false;
        if ((is_zero(ra) && is_nonzero(rb)) || (is_zero(rb) && is_nonzero(ra))) return true;
        return differs_.count({std::min(ra, rb), std::max(ra, rb)}) > 0;
    }

    bool unite(int a, int b) {
        int ra = find(a), rb = find(b);
        if (ra == rb) return true;
        if (differ(ra, rb)) return false;
        if (rb == find(zero_)) std::swap(ra, rb);
        // ra survives (ZERO stays the root of its class).
        bool nz = nonzero_[idx(ra)] || nonzero_[idx(rb)];
        if (nz && ra == find(zero_)) return false;
        parent_[idx(rb)] = ra;
        nonzero_[idx(ra)] = nz;
        std::set<std::pair<int, int>> moved;
        for (auto it = differs_.begin(); it != differs_.end();) {
            if (it->first == rb || it->second == rb) {
                int other = it->first == rb ? it->second : it->first;
                moved.insert({std::min(ra, other), std::max(ra, other)});
                it = differs_.erase(it);
            } else {
                ++it;
            }
        }
        differs_.insert(moved.begin(), moved.end());
        return true;
    }
    bool set_nonzero(int a) {
        if (is_zero(a)) return false;
        nonzero_[idx(find(a))] = true;
        return true;
    }
    bool set_zero(int a) { return unite(a, zero_); }
    bool set_differs(int a, int b) {
        int ra = find(a), rb = find(b);
        if (ra == rb) return false;
        if (ra == find(zero_)) return set_nonzero(rb);
        if (rb == find(zero_)) return set_nonzero(ra);
        differs_.insert({std::min(ra, rb), std::max(ra, rb)});
        return true;
    }

private:
    std::vector<int> parent_;
    std::vector<bool> nonzero_;
    std::set<std::pair<int, int>> differs_;
    int zero_;
};

enum class EqState { satisfied, open, force_equal, force_zero };

EqState state(const Closure& c, const ConstraintSystem::Equation& e) {
    if (c.find(e.plus) == c.find(e.minus) || c.is_zero(e.factor)) return EqState::satisfied;
    if (c.is_nonzero(e.factor)) return EqState::force_equal;
    if (c.differ(e.plus, e.minus)) return EqState::force_zero;
    return EqState::open;
}

bool propagate(Closure& c, const ConstraintSystem& cs) {
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& e : cs.equations) {
            switch (state(c, e)) {
                case EqState::force_equal:
                    if (!c.unite(e.plus, e.minus)) return false;
                    changed = true;
                    break;
                case EqState::force_zero:
                    if (!c.set_zero(e.factor)) return false;
                    changed = true;
                    break;
                default: break;
            }
        }
    }
    return true;
}

void search(Closure c, const ConstraintSystem& cs, std::vector<Closure>& leaves) {
    if (!propagate(c, cs)) return;
    for (const auto& e : cs.equations)
        if (state(c, e) == EqState::open) {
            Closure z = c;
            if (z.set_zero(e.factor)) search(z, cs, leaves);
            if (c.set_nonzero(e.factor)) search(c, cs, leaves);
            return;
        }
    int m = static_cast<int>(cs.names.size());
    for (int a = 0; a < m; ++a)
        if (!c.is_zero(a) && !c.is_nonzero(a)) {
            Closure z = c;
            if (z.set_zero(a)) search(z, cs, leaves);
            if (c.set_nonzero(a)) search(c, cs, leaves);
            return;
        }
    leaves.push_back(std::move(c));
}

bool connected(const std::vector<RootVector>& roots) {
    if (roots.empty()) return false;
    std::vector<bool> reached(roots.size());
    std::vector<std::size_t> stack{0};
    reached[0] = true;
    while (!stack.empty()) {
        std::size_t i = stack.back();
        stack.pop_back();
        for (std::size_t j = 0; j < roots.size(); ++j)
            if (!reached[j] && sgn(dot(roots[i].coords, roots[j].coords)) != 0) {
                reached[j] = true;
                stack.push_back(j);
            }
    }
    return std::all_of(reached.begin(), reached.end(), [](bool b) { return b; });
}

int rank_of(const std::vector<RootVector>& roots) {
    std::vector<std::vector<BigRat>> rows;
    for (const auto& r : roots) rows.push_back(r.coords);
    return rows.empty() ? 0 : Matrix::from_rows(rows).rank();
}

std::size_t group_order(const std::vector<RootVector>& roots, int n, std::size_t cap) {
    Arrangement a(n);
    for (const auto& r : roots) a.add(r, BigRat(1));
    GroupClosure g = generate_group(a, cap);
    if (g.capped) throw InvalidInput("reflection group exceeds the cap of " + std::to_string(cap));
    return g.order();
}

std::size_t factorial(int n) {
    std::size_t f = 1;
    for (int k = 2; k <= n; ++k) f *= static_cast<std::size_t>(k);
    return f;
}

struct LeafClass {
    Verdict::Kind kind;
    std::string label;
};

// Classifies one support; nullopt when it is disconnected or too small to span an A_{n-1} arrangement.
std::optional<LeafClass> classify_support(const ConstraintSystem& cs, const std::vector<int>& support, std::size_t cap) {
    std::vector<RootVector> roots;
    for (int u : support) roots.push_back(cs.roots[idx(u)]);
    int n = cs.n;
    if (!connected(roots) || rank_of(roots) < n - 1) return std::nullopt;
    std::string tname = to_string(cs.type);
    if (support.size() == cs.roots.size()) {
        int rank = cs.type == RootType::A ? n - 1 : n;
        return LeafClass{Verdict::Kind::full_positive_system, tname + std::to_string(rank)};
    }
    if (cs.type == RootType::B) {
        bool pairs_only = std::all_of(roots.begin(), roots.end(), [](const RootVector& r) { return nonzero_count(r) == 2; });
        if (pairs_only && static_cast<int>(roots.size()) == n * (n - 1)) return LeafClass{Verdict::Kind::d_inside_b, "D" + std::to_string(n)};
    }
    std::size_t order = group_order(roots, n, cap);
    if (order == factorial(n) && rank_of(roots) == n - 1)
        return LeafClass{Verdict::Kind::contradicts_w, "A" + std::to_string(n - 1) + "-type"};
    return LeafClass{Verdict::Kind::contradicts_w, "|W| = " + std::to_string(order)};
}

}  // namespace

Verdict classify_arrangement(const ConstraintSystem& cs, const std::vector<Seed>& seeds, std::size_t cap) {
    int m = static_cast<int>(cs.names.size());
    Closure start(m);
    bool ok = true;
    for (const auto& s : seeds) {
        int a = cs.index_of(s.a);
        switch (s.kind) {
            case Seed::Kind::nonzero: ok = ok && start.set_nonzero(a); break;
            case Seed::Kind::differs: ok = ok && start.set_differs(a, cs.index_of(s.b)); break;
            case Seed::Kind::equals: ok = ok && start.unite(a, cs.index_of(s.b)); break;
        }
    }
    Verdict v;
    v.kind = Verdict::Kind::contradiction;
    if (!ok) return v;

    std::vector<Closure> leaves;
    search(start, cs, leaves);

    // Leaves that contradict W only decide the verdict when nothing else survives.
    struct Kept {
        LeafClass cls;
        std::vector<int> support;
        const Closure* closure;
    };
    std::vector<Kept> admissible;
    std::vector<Kept> contradicting;
    std::set<std::vector<int>> seen;
    for (const auto& c : leaves) {
        std::vector<int> support;
        for (int a = 0; a < m; ++a)
            if (c.is_nonzero(a)) support.push_back(a);
        auto cls = classify_support(cs, support, cap);
        if (!cls) continue;
        Kept k{*cls, support, &c};
        (cls->kind == Verdict::Kind::contradicts_w ? contradicting : admissible).push_back(k);
    }
    const auto& chosen = admissible.empty() ? contradicting : admissible;
    if (chosen.empty()) return v;

    std::set<std::pair<Verdict::Kind, std::string>> kinds;
    for (const auto& k : chosen) kinds.insert({k.cls.kind, k.cls.label});
    if (kinds.size() == 1) {
        v.kind = kinds.begin()->first;
        v.label = kinds.begin()->second;
    } else if (admissible.empty()) {
        v.kind = Verdict::Kind::contradicts_w;
        for (const auto& [kind, label] : kinds) v.label += (v.label.empty() ? "" : ", ") + label;
    } else {
        v.kind = Verdict::Kind::ambiguous;
        for (const auto& [kind, label] : kinds)
            v.label += std::string(v.label.empty() ? "" : ", ") + invsq::to_string(kind) + " " + label;
    }

    std::map<std::string, std::vector<int>> orbits;
    for (int a = 0; a < m; ++a) {
        int nz = nonzero_count(cs.roots[idx(a)]);
        orbits[nz == 1 ? "C0" : "C"].push_back(a);
    }
    for (const auto& [orbit, members] : orbits) {
        bool all_equal = true;
        for (const auto& k : chosen)
            for (int a : members) all_equal = all_equal && k.closure->find(a) == k.closure->find(members.front());
        v.equal_per_orbit[orbit] = all_equal;
    }
    for (const auto& k : chosen) {
        if (!seen.insert(k.support).second) continue;
        std::vector<std::string> names;
        for (int a : k.support) names.push_back(cs.names[idx(a)]);
        v.supports.push_back(std::move(names));
    }
    return v;
}

Verdict classify_arrangement(const Arrangement& arr, std::optional<RootType> type, const std::vector<Seed>& extra,
                             std::size_t cap) {
    if (arr.size() > 0 && is_irreducible(arr) == Irreducibility::fails_I2) {
        Verdict v;
        v.kind = Verdict::Kind::fails_I2;
        return v;
    }
    ConstraintSystem cs = residue_constraints(arr, type);
    auto seeds = seeds_from_arrangement(cs, arr);
    seeds.insert(seeds.end(), extra.begin(), extra.end());
    return classify_arrangement(cs, seeds, cap);
}

Matrix d4_twist_matrix(int sign) {
    if (sign != 1 && sign != -1) throw InvalidInput("sign must be +1 or -1");
    BigRat h(1, 2);
    BigRat s = h * sign;
    return Matrix::from_rows({{h, s, s, s}, {s, h, -h, -h}, {s, -h, h, -h}, {s, -h, -h, h}});
}

D4TwistResult d4_twist_check() {
    auto sym = [](std::initializer_list<int> p) {
        std::vector<int> v(p);
        return DiffOp::term(4, 0, v, RatFunc::constant(4, 1));
    };
    DiffOp pairs(4);
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            std::vector<int> p(4);
            p[idx(i)] = p[idx(j)] = 2;
            pairs += DiffOp::term(4, 0, p, RatFunc::constant(4, 1));
        }
    DiffOp quartic = sym({4, 0, 0, 0}) + sym({0, 4, 0, 0}) + sym({0, 0, 4, 0}) + sym({0, 0, 0, 4});
    DiffOp target = quartic * BigRat(3, 4) - pairs * BigRat(1, 2);
    DiffOp mixed = sym({1, 1, 1, 1});

    D4TwistResult r;
    r.plus = change_coords_orthogonal(pairs + mixed * BigRat(6), d4_twist_matrix(1)) == target;
    r.minus = change_coords_orthogonal(pairs - mixed * BigRat(6), d4_twist_matrix(-1)) == target;
    r.control_differs = !(change_coords_orthogonal(pairs, d4_twist_matrix(1)) == target) &&
                        !(change_coords_orthogonal(pairs, d4_twist_matrix(-1)) == target);
    return r;
}

}  // namespace invsq
