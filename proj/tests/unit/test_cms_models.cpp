#include <catch2/catch_amalgamated.hpp>

#include "invsq/cms_models.hpp"
#include "invsq/laurent.hpp"
#include "support/random.hpp"

#include <functional>
#include <numeric>
#include <set>

using namespace invsq;
using invsq::testing::Gen;

namespace {

BigRat q(long a, long b = 1) {
    BigRat r(a, b);
    r.canonicalize();
    return r;
}

Poly X(int n, int i) { return Poly::variable(n, i); }
RatFunc R(const Poly& p) { return RatFunc(p); }

RootVector root(std::vector<int> c) {
    std::vector<BigRat> v(c.begin(), c.end());
    return RootVector(v);
}

PotentialSpec spec(std::optional<BigRat> C, std::optional<BigRat> C0 = BigRat(0)) {
    PotentialSpec s;
    s.C = C;
    s.C0 = C0;
    return s;
}

DiffOp sym(int n, std::vector<int> p) { return DiffOp::term(n, 0, p, RatFunc::constant(n, 1)); }

}  // namespace

TEST_CASE("Schrodinger operator builds") {
    // A2 with symbolic C: x1, x2, x3, C.
    DiffOp L = build_L(positive_system(RootType::A, 3), spec(std::nullopt));
    int nv = 4;
    RatFunc C = RatFunc::variable(nv, 3);
    RatFunc pot = C * (R(X(nv, 0) - X(nv, 1)).pow(-2) + R(X(nv, 0) - X(nv, 2)).pow(-2) + R(X(nv, 1) - X(nv, 2)).pow(-2));
    CHECK(L == -DiffOp::laplacian(3, 1) + DiffOp::scalar(3, pot).with_params(1));

    DiffOp Lb = build_L(positive_system(RootType::B, 2), spec(q(2), q(3)));
    RatFunc x1 = R(X(2, 0)), x2 = R(X(2, 1));
    RatFunc potb = ((x1 + x2).pow(-2) + (x1 - x2).pow(-2)) * q(2) + (x1.pow(-2) + x2.pow(-2)) * q(3);
    CHECK(Lb == -DiffOp::laplacian(2) + DiffOp::scalar(2, potb));

    CHECK(build_L(Arrangement(3), PotentialSpec{}) == -DiffOp::laplacian(3));

    Arrangement known(2);
    known.add(root({1, -1}), q(5));
    CHECK(build_L(known) == -DiffOp::laplacian(2) + DiffOp::scalar(2, (x1 - x2).pow(-2) * q(5)));
    Arrangement unknown(2);
    unknown.add(root({1, -1}));
    CHECK_THROWS_AS(build_L(unknown), InvalidInput);

    PotentialSpec wp;
    wp.kind = PotentialSpec::Kind::wp_series;
    CHECK_THROWS_AS(build_L(positive_system(RootType::A, 3), wp), InvalidInput);

    // m parameterization: C_alpha = m(m+1)<alpha, alpha>.
    PotentialSpec ms;
    ms.m = 1;
    DiffOp Lm = build_L(positive_system(RootType::B, 2), ms);
    RatFunc potm = ((x1 + x2).pow(-2) + (x1 - x2).pow(-2)) * q(4) + (x1.pow(-2) + x2.pow(-2)) * q(2);
    CHECK(Lm == -DiffOp::laplacian(2) + DiffOp::scalar(2, potm));
}

TEST_CASE("type A potentials commute with the total momentum") {
    for (int n = 3; n <= 5; ++n) {
        DiffOp L = build_L(positive_system(RootType::A, n), spec(std::nullopt));
        DiffOp delta(n, 1);
        for (int i = 0; i < n; ++i) delta += DiffOp::partial(n, 1, i);
        CHECK(commutator(L, delta).is_zero());
    }
}

TEST_CASE("type A third-order commutant") {
    PotentialSpec s = spec(std::nullopt);
    DiffOp P = build_P_typeA(3, s);
    int nv = 4;
    RatFunc C = RatFunc::variable(nv, 3);
    auto inv2 = [&](int i, int j) { return R(X(nv, i) - X(nv, j)).pow(-2); };
    DiffOp expected = DiffOp::term(3, 1, std::vector<int>{1, 1, 1}, RatFunc::constant(nv, 1)) +
                      DiffOp::term(3, 1, std::vector<int>{1, 0, 0}, C * inv2(1, 2) * q(1, 2)) +
                      DiffOp::term(3, 1, std::vector<int>{0, 1, 0}, C * inv2(0, 2) * q(1, 2)) +
                      DiffOp::term(3, 1, std::vector<int>{0, 0, 1}, C * inv2(0, 1) * q(1, 2));
    CHECK(P == expected);
    CHECK(parity_check(P) == Parity::skew_adjoint);

    DiffOp P0 = build_P_typeA(4, spec(q(0)));
    CHECK(P0 == sym(4, {1, 1, 1, 0}) + sym(4, {1, 1, 0, 1}) + sym(4, {1, 0, 1, 1}) + sym(4, {0, 1, 1, 1}));

    DiffOp P4 = build_P_typeA(4, PotentialSpec{});
    RatFunc a1 = P4.coeff(Monomial::var(0));
    CHECK(a1.den_factors().size() == 3);
    CHECK(a1 == (R(X(4, 1) - X(4, 2)).pow(-2) + R(X(4, 1) - X(4, 3)).pow(-2) + R(X(4, 2) - X(4, 3)).pow(-2)) * q(1, 2));

    CHECK_THROWS_AS(build_P_typeA(2, PotentialSpec{}), InvalidInput);
}

TEST_CASE("type A commutation") {
    DiffOp L = build_L(positive_system(RootType::A, 3), spec(std::nullopt));
    DiffOp P = build_P_typeA(3, spec(std::nullopt));
    CHECK(verify_commutant(L, P).zero);
    Gen g(99);
    for (int i = 0; i < 5; ++i) {
        BigRat c = g.nonzero_rat(20);
        std::vector<BigRat> v{c};
        CHECK(commutator(L.specialize(v), P.specialize(v)).is_zero());
        CHECK(verify_commutant(build_L(positive_system(RootType::A, 3), spec(c)), build_P_typeA(3, spec(c))).zero);
    }
    CHECK(verify_commutant(build_L(positive_system(RootType::A, 4), PotentialSpec{}), build_P_typeA(4, PotentialSpec{})).zero);
    CHECK(verify_commutant(L, L).zero);
}

TEST_CASE("type A commutation by application to test functions") {
    // L(P f) - P(L f) computed with apply only, on f = poly * (x_i - x_j)^s.
    BigRat c = q(5, 3);
    DiffOp L = build_L(positive_system(RootType::A, 3), spec(c));
    DiffOp P = build_P_typeA(3, spec(c));
    Gen g(4242);
    for (int k = 0; k < 12; ++k) {
        int i = g.uniform(0, 1), j = g.uniform(i + 1, 2), s = g.uniform(-2, 3);
        RatFunc f = R(g.poly(3, 3, 3)) * R(X(3, i) - X(3, j)).pow(s);
        CHECK((L.apply(P.apply(f)) - P.apply(L.apply(f))).is_zero());
    }
}

TEST_CASE("a non-invariant candidate leaves a grade-one residual") {
    DiffOp L = build_L(positive_system(RootType::A, 3), spec(q(1)));
    CommutantReport r = verify_commutant(L, DiffOp::partial(3, 0, 0, 3));
    CHECK_FALSE(r.zero);
    REQUIRE_FALSE(r.residual_by_grade.empty());
    CHECK(r.residual_by_grade.begin()->first == 1);
    // [R, d1^3] at grade one is -3 (d1 R) d1^2.
    RatFunc Rpot = L.coeff(Monomial());
    const auto& g1 = r.residual_by_grade.at(1);
    REQUIRE(g1.size() == 1);
    CHECK(g1.front().first == Monomial::var(0, 2));
    CHECK(g1.front().second == Rpot.derivative(0) * q(-3));
}

TEST_CASE("type B/D coefficient shapes") {
    DiffOp P = build_P_typeBD(2, spec(std::nullopt, std::nullopt), RootType::B);
    int nv = 4;
    RatFunc C = RatFunc::variable(nv, 2), C0 = RatFunc::variable(nv, 3);
    RatFunc x1 = R(X(nv, 0)), x2 = R(X(nv, 1));
    CHECK(P.coeff(Monomial::var(0) * Monomial::var(1)) == C * ((x1 - x2).pow(-2) - (x1 + x2).pow(-2)));
    CHECK(P.coeff(Monomial::var(0, 2)) == -C0 * x2.pow(-2));
    CHECK(P.coeff(Monomial::var(1, 2)) == -C0 * x1.pow(-2));
    CHECK(P.coeff(Monomial::var(0, 2) * Monomial::var(1, 2)) == RatFunc::constant(nv, 1));

    DiffOp D3 = build_P_typeBD(3, PotentialSpec{}, RootType::D);
    RatFunc y1 = R(X(3, 0)), y2 = R(X(3, 1)), y3 = R(X(3, 2));
    CHECK(D3.coeff(Monomial::var(0, 2)) == -((y2 + y3).pow(-2) + (y2 - y3).pow(-2)));

    DiffOp P0 = build_P_typeBD(3, spec(q(0), q(0)), RootType::B);
    CHECK(P0 == sym(3, {2, 2, 0}) + sym(3, {2, 0, 2}) + sym(3, {0, 2, 2}));

    CHECK_THROWS_AS(build_P_typeBD(3, spec(q(1), q(1)), RootType::D), InvalidInput);
    CHECK_THROWS_AS(build_P_typeBD(2, PotentialSpec{}, RootType::D), InvalidInput);
    CHECK_THROWS_AS(build_P_typeBD(3, PotentialSpec{}, RootType::A), InvalidInput);
}

TEST_CASE("type B commutation with integrated zeroth-order term") {
    std::vector<PotentialSpec> cases{spec(q(1), q(3)), spec(q(2), q(1, 2)), spec(std::nullopt, q(1)),
                                     spec(std::nullopt, std::nullopt)};
    for (const auto& s : cases) {
        DiffOp L = build_L(positive_system(RootType::B, 2), s);
        DiffOp P = build_P_typeBD(2, s, RootType::B);
        CHECK(verify_commutant(L, P).zero);
        CHECK(parity_check(P) == Parity::self_adjoint);
        CHECK_FALSE(P.coeff(Monomial()).is_zero());
    }
    PotentialSpec b3 = spec(q(3, 2), q(5));
    CHECK(verify_commutant(build_L(positive_system(RootType::B, 3), b3), build_P_typeBD(3, b3, RootType::B)).zero);
}

TEST_CASE("type D commutation") {
    for (int n : {3, 4}) {
        DiffOp L = build_L(positive_system(RootType::D, n), PotentialSpec{});
        DiffOp P = build_P_typeBD(n, PotentialSpec{}, RootType::D);
        CHECK(verify_commutant(L, P).zero);
        CHECK(parity_check(P) == Parity::self_adjoint);
    }
}

TEST_CASE("pole-cancellation limits of the zeroth-order equation") {
    // Distinct couplings C12, C13, C23 as parameters 3, 4, 5.
    int n = 3, nv = 6;
    auto cp = [&](int a, int b) { return RatFunc::variable(nv, 3 + (std::min(a, b) == 0 ? std::max(a, b) - 1 : 2)); };
    auto diff = [&](int a, int b) { return X(nv, a) - X(nv, b); };
    auto U = [&](int p, int r) { return cp(p, r) * R(diff(p, r)).pow(-2); };
    std::vector<RatFunc> parts;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            for (int p = 0; p < n; ++p)
                if (p != i && p != j) parts.push_back((U(p, j) - U(p, i)) * cp(i, j) * R(diff(i, j)).pow(-3) * q(-2));
    RatFunc lhs = sum(parts, nv);
    CHECK(lhs.is_zero() == false);

    ConstraintSystem cs = residue_constraints(positive_system(RootType::A, 3));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            int k = 3 - i - j;
            std::vector<BigRat> l(3);
            l[static_cast<std::size_t>(i)] = 1;
            l[static_cast<std::size_t>(j)] = -1;
            LaurentSlice s = laurent_along(lhs, LinearForm(l));
            CHECK(s.min_order == -3);

            // Oracle: clear the cube and set x_j = x_i.
            std::vector<Poly> images;
            for (int v = 0; v < nv; ++v) images.push_back(v == j ? X(nv, i) : X(nv, v));
            RatFunc cleared = (lhs * R(diff(i, j)).pow(3)).substitute(images);
            RatFunc expected = cp(i, j) * (cp(i, k) - cp(j, k)) * R(diff(k, i)).pow(-2) * q(2);
            CHECK(cleared == expected);

            // The Laurent coefficient lives in frame coordinates y = rows x.
            std::vector<Poly> to_y;
            for (int r = 0; r < 3; ++r) to_y.push_back(Poly::linear(nv, s.frame.rows.row(r)));
            for (int v = 3; v < nv; ++v) to_y.push_back(X(nv, v));
            CHECK(s.coeff(-3).substitute(to_y).substitute(images) == expected);

            // Second limit along x_k - x_i.
            std::vector<BigRat> l2(3);
            l2[static_cast<std::size_t>(k)] = 1;
            l2[static_cast<std::size_t>(i)] = -1;
            LaurentSlice s2 = laurent_along(expected, LinearForm(l2));
            RatFunc residue = s2.coeff(-2);
            CHECK(residue == cp(i, j) * (cp(i, k) - cp(j, k)) * q(2));

            std::string f = "C" + std::to_string(i + 1) + std::to_string(j + 1);
            auto name = [](int a, int b) { return "C" + std::to_string(std::min(a, b) + 1) + std::to_string(std::max(a, b) + 1); };
            bool found = false;
            for (const auto& e : cs.equations) {
                std::set<std::string> pm{cs.names[static_cast<std::size_t>(e.plus)], cs.names[static_cast<std::size_t>(e.minus)]};
                if (cs.names[static_cast<std::size_t>(e.factor)] == f && pm == std::set<std::string>{name(i, k), name(j, k)})
                    found = true;
            }
            CHECK(found);
        }
}

TEST_CASE("zeroth-order functional equation for rational u") {
    CHECK(functional_eq_A7_check(3, spec(std::nullopt)).vanishes);
    CHECK(functional_eq_A7_check(4, spec(q(7, 2))).vanishes);
    RatFunc t = RatFunc::variable(1, 0);
    CHECK(functional_eq_A7_check(3, t.pow(-2) * q(3) + RatFunc::constant(1, 5)).vanishes);

    // u = 1/t: the three order -1 contributions along x1 - x2 sum to 1/(x2 - x3)^2.
    A7Result odd = functional_eq_A7_check(3, t.pow(-1));
    CHECK_FALSE(odd.vanishes);
    CHECK(odd.first_failing_order == -1);

    CHECK_FALSE(functional_eq_A7_check(3, t.pow(-2) + t.pow(2)).vanishes);
    CHECK_THROWS_AS(functional_eq_A7_check(2, spec(q(1))), InvalidInput);
}

TEST_CASE("Weierstrass series coefficients") {
    WpSeries s = wp_series(6);
    Poly g2 = X(2, 0), g3 = X(2, 1);
    CHECK(s.c[2] == g2 * q(1, 20));
    CHECK(s.c[3] == g3 * q(1, 28));
    CHECK(s.c[4] == g2 * g2 * q(1, 1200));
    CHECK(s.c[5] == g2 * g3 * q(3, 6160));

    // g2 = g3 = 0 leaves only t^-2.
    std::vector<BigRat> zero{0, 0};
    for (const auto& [e, c] : s.laurent())
        if (e != -2) CHECK(c.evaluate(zero) == 0);
    CHECK_THROWS_AS(wp_series(1), InvalidInput);
}

TEST_CASE("Weierstrass differential equation residual") {
    for (int N : {6, 12}) {
        WpSeries s = wp_series(N);
        auto res = wp_ode_residual(s);
        REQUIRE_FALSE(res.empty());
        // Truncation error starts at t^(2N-4) with coefficient (8N+12) c_{N+1}.
        CHECK(res.begin()->first == 2 * N - 4);
        CHECK(res.begin()->second == wp_series(N + 1).c[static_cast<std::size_t>(N + 1)] * BigRat(8 * N + 12));

        // Oracle: the same expression in Q(t, g2, g3).
        int nv = 3;
        RatFunc t = RatFunc::variable(nv, 0);
        RatFunc wp(nv);
        for (const auto& [e, c] : s.laurent()) wp += R(c.embed(nv, 1)) * t.pow(e);
        RatFunc dwp = wp.derivative(0);
        RatFunc ode = dwp * dwp - wp * wp * wp * q(4) + RatFunc::variable(nv, 1) * wp + RatFunc::variable(nv, 2);
        RatFunc series(nv);
        for (const auto& [e, c] : res) series += R(c.embed(nv, 1)) * t.pow(e);
        CHECK(ode == series);
    }
}

TEST_CASE("Weierstrass series solves the zeroth-order equation") {
    PotentialSpec s;
    s.kind = PotentialSpec::Kind::wp_series;
    s.N = 12;
    A7Result r = functional_eq_A7_check(3, s);
    CHECK(r.vanishes);
    CHECK(r.checked_degrees.front() == -5);
    CHECK(r.checked_degrees.back() == 19);
    s.c1 = q(2, 3);
    s.c2 = q(5);
    s.N = 8;
    CHECK(functional_eq_A7_check(4, s).vanishes);
}

TEST_CASE("residue constraint systems") {
    ConstraintSystem a3 = residue_constraints(positive_system(RootType::A, 3));
    CHECK(a3.type == RootType::A);
    CHECK(a3.names == std::vector<std::string>{"C12", "C13", "C23"});
    CHECK(a3.equations.size() == 3);
    CHECK(a3.equation_string(a3.equations.front()) == "C12*(C13 - C23) = 0");

    ConstraintSystem b2 = residue_constraints(positive_system(RootType::B, 2));
    CHECK(b2.type == RootType::B);
    std::set<std::string> b2eq;
    for (const auto& e : b2.equations) b2eq.insert(b2.equation_string(e));
    CHECK(b2eq == std::set<std::string>{"Cm12*(C1 - C2) = 0", "Cp12*(C1 - C2) = 0", "C1*(Cp12 - Cm12) = 0",
                                        "C2*(Cp12 - Cm12) = 0"});

    // Enumeration oracle for D4: ordered (i, j, k), both signs, identified up to sign.
    ConstraintSystem d4 = residue_constraints(positive_system(RootType::D, 4));
    std::set<std::tuple<std::string, std::string, std::string>> keys;
    auto pn = [](const char* pre, int a, int b) {
        return pre + std::to_string(std::min(a, b) + 1) + std::to_string(std::max(a, b) + 1);
    };
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            for (int k = 0; k < 4; ++k) {
                if (i == j || j == k || i == k) continue;
                for (const char* s : {"Cp", "Cm"}) {
                    std::string o = std::string(s) == "Cp" ? "Cm" : "Cp";
                    auto a = pn(s, i, k), b = pn(s, j, k);
                    keys.insert({pn("Cm", i, j), std::min(a, b), std::max(a, b)});
                    auto c = pn(s, i, k), d = pn(o.c_str(), j, k);
                    keys.insert({pn("Cp", i, j), std::min(c, d), std::max(c, d)});
                }
            }
    CHECK(d4.equations.size() == keys.size());
    CHECK(d4.equations.size() == 48);

    Arrangement bad(3);
    bad.add(root({1, 2, 0}));
    CHECK_THROWS_AS(residue_constraints(bad), InvalidInput);
    Arrangement coord(3);
    coord.add(root({1, 0, 0}));
    CHECK_THROWS_AS(residue_constraints(coord, RootType::A), InvalidInput);
    CHECK(residue_constraints(coord).type == RootType::B);
}

TEST_CASE("seeds from an arrangement") {
    ConstraintSystem cs = residue_constraints(positive_system(RootType::A, 3));
    Arrangement arr(3);
    arr.add(root({2, -2, 0}), q(4));
    arr.add(root({0, 1, -1}), q(1));
    arr.add(root({1, 0, -1}), q(2));
    auto seeds = seeds_from_arrangement(cs, arr);
    int equals = 0, differs = 0, nonzero = 0;
    for (const auto& s : seeds) {
        if (s.kind == Seed::Kind::nonzero) ++nonzero;
        if (s.kind == Seed::Kind::equals) {
            ++equals;
            CHECK(std::set<std::string>{s.a, s.b} == std::set<std::string>{"C12", "C23"});
        }
        if (s.kind == Seed::Kind::differs) ++differs;
    }
    CHECK(nonzero == 3);
    CHECK(equals == 1);
    CHECK(differs == 2);
}

namespace {

// Brute force over supports: a support is feasible when the unions forced by
// its nonzero factors never mix zero and nonzero unknowns and respect the seeds.
Verdict brute_force(const ConstraintSystem& cs, const std::vector<Seed>& seeds) {
    int m = static_cast<int>(cs.names.size());
    int n = cs.n;
    struct Leaf {
        std::vector<int> support;
        std::vector<int> cls;
        Verdict::Kind kind;
        std::string label;
    };
    std::vector<Leaf> leaves;
    for (unsigned mask = 1; mask < (1u << m); ++mask) {
        auto in = [&](int a) { return ((mask >> a) & 1u) != 0; };
        std::vector<int> parent(static_cast<std::size_t>(m));
        std::iota(parent.begin(), parent.end(), 0);
        std::function<int(int)> find = [&](int a) {
            return parent[static_cast<std::size_t>(a)] == a ? a : parent[static_cast<std::size_t>(a)] = find(parent[static_cast<std::size_t>(a)]);
        };
        auto unite = [&](int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); };
        bool ok = true;
        for (const auto& s : seeds) {
            int a = cs.index_of(s.a);
            if (s.kind == Seed::Kind::nonzero) ok = ok && in(a);
            if (s.kind == Seed::Kind::equals) unite(a, cs.index_of(s.b));
        }
        for (const auto& e : cs.equations)
            if (in(e.factor)) unite(e.plus, e.minus);
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b)
                if (find(a) == find(b) && in(a) != in(b)) ok = false;
        for (const auto& s : seeds)
            if (s.kind == Seed::Kind::differs) {
                int a = cs.index_of(s.a), b = cs.index_of(s.b);
                if (find(a) == find(b) || (!in(a) && !in(b))) ok = false;
            }
        if (!ok) continue;

        std::vector<int> support;
        std::vector<RootVector> roots;
        for (int a = 0; a < m; ++a)
            if (in(a)) {
                support.push_back(a);
                roots.push_back(cs.roots[static_cast<std::size_t>(a)]);
            }
        Arrangement sub(n);
        for (const auto& r : roots) sub.add(r, BigRat(1));
        std::vector<std::vector<BigRat>> rows;
        for (const auto& r : roots) rows.push_back(r.coords);
        int rank = Matrix::from_rows(rows).rank();
        // Connectivity of the non-orthogonality graph.
        bool conn = true;
        {
            std::vector<int> comp(roots.size());
            std::iota(comp.begin(), comp.end(), 0);
            std::function<int(int)> f = [&](int a) { return comp[static_cast<std::size_t>(a)] == a ? a : f(comp[static_cast<std::size_t>(a)]); };
            for (std::size_t a = 0; a < roots.size(); ++a)
                for (std::size_t b = 0; b < roots.size(); ++b)
                    if (sgn(dot(roots[a].coords, roots[b].coords)) != 0) comp[static_cast<std::size_t>(f(static_cast<int>(a)))] = f(static_cast<int>(b));
            for (std::size_t a = 0; a < roots.size(); ++a) conn = conn && f(static_cast<int>(a)) == f(0);
        }
        if (!conn || rank < n - 1) continue;

        Leaf leaf;
        leaf.support = support;
        for (int a = 0; a < m; ++a) leaf.cls.push_back(in(a) ? find(a) : -1);
        if (static_cast<int>(support.size()) == m) {
            leaf.kind = Verdict::Kind::full_positive_system;
            leaf.label = std::string(to_string(cs.type)) + std::to_string(cs.type == RootType::A ? n - 1 : n);
        } else if (cs.type == RootType::B && static_cast<int>(support.size()) == n * (n - 1) &&
                   std::all_of(roots.begin(), roots.end(), [](const RootVector& r) {
                       return std::count_if(r.coords.begin(), r.coords.end(), [](const BigRat& c) { return sgn(c) != 0; }) == 2;
                   })) {
            leaf.kind = Verdict::Kind::d_inside_b;
            leaf.label = "D" + std::to_string(n);
        } else {
            std::size_t order = generate_group(sub).order();
            std::size_t fact = 1;
            for (int k = 2; k <= n; ++k) fact *= static_cast<std::size_t>(k);
            leaf.kind = Verdict::Kind::contradicts_w;
            leaf.label = order == fact && rank == n - 1 ? "A" + std::to_string(n - 1) + "-type" : "|W| = " + std::to_string(order);
        }
        leaves.push_back(leaf);
    }
    std::vector<Leaf> good, bad;
    for (const auto& l : leaves) (l.kind == Verdict::Kind::contradicts_w ? bad : good).push_back(l);
    const auto& chosen = good.empty() ? bad : good;
    Verdict v;
    v.kind = Verdict::Kind::contradiction;
    if (chosen.empty()) return v;
    std::set<std::pair<Verdict::Kind, std::string>> kinds;
    for (const auto& l : chosen) kinds.insert({l.kind, l.label});
    v.kind = kinds.size() == 1 ? kinds.begin()->first : good.empty() ? Verdict::Kind::contradicts_w : Verdict::Kind::ambiguous;
    for (const auto& [kind, label] : kinds) {
        std::string item = kinds.size() == 1 || good.empty() ? label : std::string(to_string(kind)) + " " + label;
        v.label += (v.label.empty() ? "" : ", ") + item;
    }
    for (const auto& l : chosen) {
        std::vector<std::string> names;
        for (int a : l.support) names.push_back(cs.names[static_cast<std::size_t>(a)]);
        v.supports.push_back(names);
    }
    return v;
}

std::set<std::vector<std::string>> as_set(const std::vector<std::vector<std::string>>& v) {
    return {v.begin(), v.end()};
}

}  // namespace

TEST_CASE("classification fixtures") {
    for (int n = 3; n <= 5; ++n) {
        Arrangement arr(n);
        arr.add(root(n == 3 ? std::vector<int>{1, -1, 0} : n == 4 ? std::vector<int>{1, -1, 0, 0} : std::vector<int>{1, -1, 0, 0, 0}), q(1));
        Verdict v = classify_arrangement(arr, RootType::A);
        CHECK(v.kind == Verdict::Kind::full_positive_system);
        CHECK(v.label == "A" + std::to_string(n - 1));
        CHECK(v.equal_per_orbit.at("C"));
        REQUIRE(v.supports.size() == 1);
        CHECK(static_cast<int>(v.supports.front().size()) == n * (n - 1) / 2);
    }

    Arrangement b2(2);
    b2.add(root({1, -1}), q(1));
    Verdict vb = classify_arrangement(b2, RootType::B);
    CHECK(vb.kind == Verdict::Kind::full_positive_system);
    CHECK(vb.label == "B2");
    CHECK(vb.equal_per_orbit.at("C"));
    CHECK(vb.equal_per_orbit.at("C0"));

    Arrangement d4(4);
    d4.add(root({1, -1, 0, 0}), q(1));
    Verdict vd = classify_arrangement(d4, RootType::D, {{Seed::Kind::differs, "Cp12", "Cm12"}});
    CHECK(vd.kind == Verdict::Kind::contradicts_w);
    CHECK(vd.label == "A3-type");

    Arrangement split(2);
    split.add(root({1, 0}), q(1));
    split.add(root({0, 1}), q(1));
    CHECK(classify_arrangement(split, RootType::B).kind == Verdict::Kind::fails_I2);

    // Known couplings that differ inside one orbit contradict the propagation.
    Arrangement clash(3);
    clash.add(root({1, -1, 0}), q(1));
    clash.add(root({0, 1, -1}), q(2));
    CHECK(classify_arrangement(clash, RootType::A).kind == Verdict::Kind::contradiction);

    // D3 seeded on a single root: the system is D3 = A3 and closes up.
    Arrangement d3(3);
    d3.add(root({1, -1, 0}), q(1));
    CHECK(classify_arrangement(d3, RootType::D).kind == Verdict::Kind::full_positive_system);
}

TEST_CASE("classification agrees with brute-force support enumeration") {
    struct Case {
        RootType type;
        int n;
        std::vector<Seed> seeds;
    };
    using K = Seed::Kind;
    std::vector<Case> cases{
        {RootType::A, 3, {{K::nonzero, "C12", ""}}},
        {RootType::A, 4, {{K::nonzero, "C12", ""}}},
        {RootType::A, 4, {{K::nonzero, "C12", ""}, {K::nonzero, "C34", ""}}},
        {RootType::A, 5, {{K::nonzero, "C23", ""}}},
        {RootType::A, 4, {{K::nonzero, "C12", ""}, {K::differs, "C12", "C34"}}},
        {RootType::B, 2, {{K::nonzero, "Cm12", ""}}},
        {RootType::B, 2, {{K::nonzero, "C1", ""}}},
        {RootType::B, 2, {{K::nonzero, "Cm12", ""}, {K::differs, "Cp12", "Cm12"}}},
        {RootType::B, 3, {{K::nonzero, "Cm12", ""}}},
        {RootType::B, 3, {{K::nonzero, "Cm12", ""}, {K::differs, "C1", "Cm12"}}},
        {RootType::D, 4, {{K::nonzero, "Cm12", ""}}},
        {RootType::D, 4, {{K::nonzero, "Cm12", ""}, {K::differs, "Cp12", "Cm12"}}},
    };
    for (const auto& c : cases) {
        ConstraintSystem cs = residue_constraints(positive_system(c.type, c.n), c.type);
        Verdict v = classify_arrangement(cs, c.seeds);
        Verdict b = brute_force(cs, c.seeds);
        INFO(to_string(c.type) << c.n << ": " << v.to_string() << " vs " << b.to_string());
        CHECK(v.kind == b.kind);
        CHECK(v.label == b.label);
        CHECK(as_set(v.supports) == as_set(b.supports));
    }
}

TEST_CASE("classification is independent of the seeding root within an orbit") {
    for (RootType t : {RootType::A, RootType::B, RootType::D}) {
        int n = t == RootType::A ? 4 : t == RootType::B ? 3 : 4;
        Arrangement full = positive_system(t, n);
        ConstraintSystem cs = residue_constraints(full, t);
        std::map<bool, std::string> first;  // keyed by "coordinate root"
        for (std::size_t a = 0; a < cs.names.size(); ++a) {
            const auto& name = cs.names[a];
            bool coordinate = name.size() == 2;
            Verdict v = classify_arrangement(cs, {{Seed::Kind::nonzero, name, ""}});
            Verdict again = classify_arrangement(cs, {{Seed::Kind::nonzero, name, ""}});
            CHECK(v.to_string() == again.to_string());
            first.try_emplace(coordinate, v.to_string());
            INFO(name);
            CHECK(v.to_string() == first.at(coordinate));
        }
    }
    // In B3 a pair seed also admits the D3 subsystem; a coordinate seed forces B3.
    ConstraintSystem b3 = residue_constraints(positive_system(RootType::B, 3), RootType::B);
    Verdict pair = classify_arrangement(b3, {{Seed::Kind::nonzero, "Cm12", ""}});
    CHECK(pair.kind == Verdict::Kind::ambiguous);
    CHECK(pair.supports.size() == 2);
    Verdict coord = classify_arrangement(b3, {{Seed::Kind::nonzero, "C1", ""}});
    CHECK(coord.to_string() == "full_positive_system (B3)");
}

TEST_CASE("classification is idempotent on its own output") {
    ConstraintSystem cs = residue_constraints(positive_system(RootType::B, 2), RootType::B);
    Verdict v = classify_arrangement(cs, {{Seed::Kind::nonzero, "Cm12", ""}});
    REQUIRE(v.supports.size() == 1);
    std::vector<Seed> seeds;
    for (const auto& name : v.supports.front()) seeds.push_back({Seed::Kind::nonzero, name, ""});
    Verdict w = classify_arrangement(cs, seeds);
    CHECK(w.to_string() == v.to_string());
    CHECK(as_set(w.supports) == as_set(v.supports));
}

TEST_CASE("D4 coordinate twist") {
    for (int s : {1, -1}) CHECK(d4_twist_matrix(s).is_orthogonal());
    D4TwistResult r = d4_twist_check();
    CHECK(r.plus);
    CHECK(r.minus);
    CHECK(r.control_differs);
    CHECK(r.ok());
    CHECK_THROWS_AS(d4_twist_matrix(0), InvalidInput);
}
