// Acceptance suite: one PASS/FAIL line per criterion. Time limits are pinned
// below; every check is exact, so there are no numerical tolerances.
//
//   acceptance                    exit 0 iff every criterion passes
//   acceptance --expect-fail 6    exit 0 iff exactly the listed criteria fail

#include "invsq/cms_models.hpp"
#include "invsq/laurent.hpp"
#include "invsq/rank_one.hpp"
#include "support/gen.hpp"

#include <chrono>
#include <cstring>
#include <functional>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

using namespace invsq;
using invsq::testing::Gen;

namespace {

constexpr double kLimit1Symbolic = 5.0;
constexpr double kLimit1A3 = 60.0;
constexpr double kLimit2Each = 60.0;
constexpr double kLimit3 = 5.0;
constexpr double kLimit4 = 10.0;
constexpr double kLimit5Each = 1.0;
constexpr double kLimit6 = 120.0;
constexpr double kLimit7 = 1.0;
constexpr double kLimit8 = 60.0;

class Timer {
public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

// Collects named sub-checks and renders them as one detail string.
class Report {
public:
    void check(bool ok, const std::string& what) {
        pass_ = pass_ && ok;
        items_.push_back((ok ? "" : "NOT ") + what);
    }
    void timed(double s, double limit, const std::string& what) {
        std::ostringstream os;
        os << what << " " << std::fixed << std::setprecision(2) << s << "s/" << limit << "s";
        check(s < limit, os.str());
    }
    bool pass() const { return pass_; }
    std::string detail() const {
        std::string d;
        for (std::size_t i = 0; i < items_.size(); ++i) d += (i ? "; " : "") + items_[i];
        return d;
    }

private:
    bool pass_ = true;
    std::vector<std::string> items_;
};

BigRat q(long a, long b = 1) {
    BigRat r(a, b);
    r.canonicalize();
    return r;
}

PotentialSpec rational(std::optional<BigRat> C, std::optional<BigRat> C0 = BigRat(0)) {
    PotentialSpec s;
    s.C = std::move(C);
    s.C0 = std::move(C0);
    return s;
}

RootVector root(std::vector<int> c) {
    std::vector<BigRat> v(c.begin(), c.end());
    return RootVector(v);
}

Report criterion1() {
    Report r;
    {
        Timer t;
        PotentialSpec s = rational(std::nullopt);
        bool zero = verify_commutant(build_L(positive_system(RootType::A, 3), s), build_P_typeA(3, s)).zero;
        r.check(zero, "A2 symbolic C commutator zero");
        r.timed(t.seconds(), kLimit1Symbolic, "time");
    }
    {
        Timer t;
        PotentialSpec s = rational(q(1));
        bool zero = verify_commutant(build_L(positive_system(RootType::A, 4), s), build_P_typeA(4, s)).zero;
        r.check(zero, "A3 C=1 commutator zero");
        r.timed(t.seconds(), kLimit1A3, "time");
    }
    return r;
}

Report criterion2() {
    Report r;
    struct Case {
        std::optional<BigRat> C, C0;
        const char* name;
    };
    for (const auto& c : {Case{q(1), q(3), "(1, 3)"}, Case{q(2), q(1, 2), "(2, 1/2)"}, Case{std::nullopt, q(1), "(C, 1)"}}) {
        Timer t;
        PotentialSpec s = rational(c.C, c.C0);
        bool zero = false;
        try {
            zero = verify_commutant(build_L(positive_system(RootType::B, 2), s), build_P_typeBD(2, s, RootType::B)).zero;
        } catch (const IntegrationError&) {
        }
        r.check(zero, std::string("B2 ") + c.name + " zero");
        r.timed(t.seconds(), kLimit2Each, "time");
    }
    return r;
}

Report criterion3() {
    Report r;
    Timer t;
    bool table = true;
    for (int j = 0; j <= 8; ++j)
        for (int m = 0; m <= 8; ++m) table = table && ((obstruction(j * (j + 1), m) == 0) == (j <= m));
    r.check(table, "j(j+1) table j,m<=8");

    // 50 random generic rationals; a value k(k+1) is skipped and replaced.
    Gen g(20240611);
    int generic = 0;
    bool random_ok = true;
    while (generic < 50) {
        BigRat c = g.rat(40);
        if (!is_generic(c, 1).generic()) continue;
        ++generic;
        for (int m = 0; m <= 8; ++m) random_ok = random_ok && obstruction(c, m) != 0;
    }
    r.check(random_ok, "50 generic rationals nonzero");

    bool am = true;
    for (int k = 0; k <= 3; ++k) am = am && commutator(L1(k * (k + 1)), build_Am(k)).is_zero();
    r.check(am, "A_k commutes k<=3");
    r.check(obstruction(1, 2) == q(25, 16), "obstruction(1, 2) = 25/16");
    r.timed(t.seconds(), kLimit3, "time");
    return r;
}

Report criterion4() {
    Report r;
    Timer t;
    Arrangement a2 = positive_system(RootType::A, 3);
    for (std::size_t i = 0; i < a2.size(); ++i) a2.set_coupling(i, q(5, 3));
    auto symbol = [](std::vector<int> p) { return DiffOp::term(3, 0, p, RatFunc::constant(3, 1)); };

    bool passes = true;
    for (const auto& c : invariance_gate(symbol({1, 1, 1}), a2)) passes = passes && c.invariant && !c.violation();
    r.check(passes, "xi1 xi2 xi3 passes the gate");
    bool rejected = false;
    for (const auto& c : invariance_gate(symbol({3, 0, 0}), a2)) rejected = rejected || c.violation();
    r.check(rejected, "xi1^3 rejected");
    r.check(!verify_commutant(build_L(a2), DiffOp::partial(3, 0, 0, 3)).zero, "d1^3 residual nonzero");

    struct Case {
        RootType type;
        int n;
        PotentialSpec spec;
    };
    std::vector<Case> cases{{RootType::A, 3, rational(std::nullopt)}, {RootType::A, 4, rational(q(1))},
                            {RootType::B, 2, rational(q(2), q(1, 2))}, {RootType::B, 2, rational(q(1), q(3))},
                            {RootType::D, 3, rational(q(1))}};
    bool poles = true;
    int reductions = 0;
    for (const auto& c : cases) {
        Arrangement arr = positive_system(c.type, c.n);
        DiffOp L = build_L(arr, c.spec);
        DiffOp P = c.type == RootType::A ? build_P_typeA(c.n, c.spec) : build_P_typeBD(c.n, c.spec, c.type);
        for (const auto& alpha : arr.roots()) {
            ReductionResult res = rank_one_reduce(P, L, alpha);
            ++reductions;
            poles = poles && res.ok();
            for (std::size_t k = 0; k < res.pole_orders.size(); ++k)
                poles = poles && res.pole_orders[k] <= static_cast<int>(k);
        }
    }
    r.check(poles, "pole orders <= k on " + std::to_string(reductions) + " reductions");
    r.timed(t.seconds(), kLimit4, "time");
    return r;
}

Report criterion5() {
    Report r;
    auto run = [&r](const std::string& name, const std::function<bool()>& f) {
        Timer t;
        bool ok = f();
        r.check(ok, name);
        r.timed(t.seconds(), kLimit5Each, "time");
    };
    for (int n = 3; n <= 5; ++n) {
        run("A" + std::to_string(n - 1) + " full and equal", [n] {
            Arrangement a = positive_system(RootType::A, n);
            for (std::size_t i = 0; i < a.size(); ++i) a.set_coupling(i, q(1));
            Verdict v = classify_arrangement(a, RootType::A);
            return v.kind == Verdict::Kind::full_positive_system && v.label == "A" + std::to_string(n - 1) &&
                   v.equal_per_orbit.at("C");
        });
    }
    run("B2 full, C+ = C-, C1 = C2", [] {
        Arrangement b2(2);
        b2.add(root({1, -1}), q(1));
        Verdict v = classify_arrangement(b2, RootType::B);
        return v.kind == Verdict::Kind::full_positive_system && v.label == "B2" && v.equal_per_orbit.at("C") &&
               v.equal_per_orbit.at("C0");
    });
    run("D4 C+ != C- gives A3-type contradiction", [] {
        Arrangement d4(4);
        d4.add(root({1, -1, 0, 0}), q(1));
        Verdict v = classify_arrangement(d4, RootType::D, {{Seed::Kind::differs, "Cp12", "Cm12"}});
        return v.kind == Verdict::Kind::contradicts_w && v.label == "A3-type";
    });
    run("orthogonal split fails_I2", [] {
        Arrangement s(2);
        s.add(root({1, 0}), q(1));
        s.add(root({0, 1}), q(3));
        return classify_arrangement(s, std::nullopt).kind == Verdict::Kind::fails_I2;
    });
    return r;
}

Report criterion6() {
    Report r;
    Timer t;
    constexpr int N = 12;
    PotentialSpec s;
    s.kind = PotentialSpec::Kind::wp_series;
    s.N = N;
    A7Result zeroth = functional_eq_A7_check(3, s);
    r.check(zeroth.vanishes, "zeroth-order equation vanishes through degree " +
                             (zeroth.checked_degrees.empty() ? std::string("?") : std::to_string(zeroth.checked_degrees.back())));

    auto residual = wp_ode_residual(wp_series(N));
    int lowest = residual.empty() ? 1000 : residual.begin()->first;
    r.check(lowest > 2 * N - 2, "ODE residual zero through t^" + std::to_string(2 * N - 2) + " (first nonzero t^" +
                                    std::to_string(lowest) + ")");
    r.timed(t.seconds(), kLimit6, "time");
    return r;
}

Report criterion7() {
    Report r;
    Timer t;
    D4TwistResult d = d4_twist_check();
    r.check(d.plus, "sign +1 maps the operator");
    r.check(d.minus, "sign -1 maps the operator");
    r.check(d.control_differs, "control case differs");
    r.timed(t.seconds(), kLimit7, "time");
    return r;
}

Report criterion8() {
    Report r;
    Timer t;
    constexpr int kCases = 100;

    Gen g(8001);
    bool ring = true;
    for (int i = 0; i < kCases; ++i) {
        RatFunc a = g.ratfunc(3), b = g.ratfunc(3), c = g.ratfunc(3);
        ring = ring && a + b == b + a && a * b == b * a && (a + b) + c == a + (b + c) && (a * b) * c == a * (b * c) &&
               a * (b + c) == a * b + a * c && (a - a).is_zero();
        if (!b.is_zero()) ring = ring && (a / b) * b == a;
    }
    r.check(ring, "ring laws");

    bool jacobi = true, adj = true, symb = true;
    for (int i = 0; i < kCases; ++i) {
        DiffOp a = g.diffop(2), b = g.diffop(2), c = g.diffop(2);
        jacobi = jacobi &&
                 (commutator(commutator(a, b), c) + commutator(commutator(b, c), a) + commutator(commutator(c, a), b)).is_zero();
        DiffOp e = g.diffop(2, 2, i % 2 == 0), f = g.diffop(2, 2, i % 2 == 0);
        adj = adj && adjoint(compose(e, f)) == compose(adjoint(f), adjoint(e));
        Poly prod = principal_symbol(a).poly() * principal_symbol(b).poly();
        if (!prod.is_zero()) symb = symb && principal_symbol(compose(a, b)).poly() == prod;
    }
    r.check(jacobi, "Jacobi");
    r.check(adj, "adjoint anti-homomorphism");
    r.check(symb, "principal symbol multiplicative");

    bool laurent = true;
    int expanded = 0;
    for (int i = 0; i < kCases; ++i) {
        RatFunc f = g.ratfunc(3);
        if (f.is_zero()) continue;
        std::vector<BigRat> a{g.rat(2), g.rat(2), g.rat(2)};
        if (a == std::vector<BigRat>{0, 0, 0}) a[0] = 1;
        LaurentSlice s;
        try {
            s = laurent_along(f, LinearForm(a), 3);
        } catch (const MathError&) {
            continue;
        }
        ++expanded;
        RatFunc rest = substitute_linear(f, s.frame.to_x);
        RatFunc y1 = RatFunc::variable(3, 0);
        for (const auto& [k, c] : s.coeffs) rest -= c * y1.pow(k);
        if (!rest.is_zero()) laurent = laurent && -order_in_var(rest, 0) > s.k_max;
    }
    r.check(laurent && expanded >= kCases / 2, "Laurent re-summation (" + std::to_string(expanded) + " expanded)");

    struct G {
        RootType t;
        int n;
        std::size_t order;
    };
    bool orders = true;
    for (auto c : {G{RootType::A, 3, 6}, G{RootType::B, 2, 8}, G{RootType::A, 4, 24}, G{RootType::B, 3, 48},
                   G{RootType::D, 4, 192}}) {
        GroupClosure gc = generate_group(positive_system(c.t, c.n));
        orders = orders && !gc.capped && gc.order() == c.order;
    }
    r.check(orders, "group orders 6/8/24/48/192");
    r.timed(t.seconds(), kLimit8, "time");
    return r;
}

}  // namespace

int main(int argc, char** argv) {
    std::set<std::string> expect_fail;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--expect-fail") == 0 && i + 1 < argc) {
            std::stringstream ss(argv[++i]);
            std::string id;
            while (std::getline(ss, id, ',')) expect_fail.insert(id);
        } else {
            std::cerr << "usage: acceptance [--expect-fail id,id,...]\n";
            return 2;
        }
    }

    const std::vector<std::pair<std::string, std::function<Report()>>> criteria{
        {"1", criterion1}, {"2", criterion2}, {"3", criterion3}, {"4", criterion4},
        {"5", criterion5}, {"6", criterion6}, {"7", criterion7}, {"8", criterion8},
    };
    bool as_expected = true;
    for (const auto& [id, run] : criteria) {
        Report rep;
        try {
            rep = run();
        } catch (const std::exception& e) {
            rep.check(false, std::string("threw: ") + e.what());
        }
        std::cout << (rep.pass() ? "PASS " : "FAIL ") << id << "  " << rep.detail() << std::endl;
        as_expected = as_expected && rep.pass() == !expect_fail.count(id);
    }
    return as_expected ? 0 : 1;
}
