#include "invsq/rank_one.hpp"

#include <sstream>

namespace invsq {

std::string Genericity::to_string() const {
    return k ? "nongeneric(" + std::to_string(*k) + ")" : "generic";
}

Genericity is_generic(const BigRat& C, const BigRat& normsq) {
    if (sgn(normsq) <= 0) throw InvalidInput("squared norm must be positive");
    BigRat disc = 1 + 4 * (C / normsq);
    if (!is_integer(disc) || sgn(disc) < 0) return {};
    BigInt s;
    if (!mpz_perfect_square_p(disc.get_num_mpz_t())) return {};
    mpz_sqrt(s.get_mpz_t(), disc.get_num_mpz_t());
    if (mpz_even_p(s.get_mpz_t())) return {};
    BigInt k = (s - 1) / 2;
    if (!k.fits_sint_p()) throw InvalidInput("coupling too large");
    return {static_cast<int>(k.get_si())};
}

BCTable bc_recursion(const BigRat& cbar, int m, const std::vector<BigRat>& free) {
    if (m < 0) throw InvalidInput("m must be non-negative");
    if (static_cast<int>(free.size()) != m + 1) throw InvalidInput("bc_recursion needs m+1 free constants");
    BCTable t;
    t.cbar = cbar;
    t.m = m;
    t.c.resize(static_cast<std::size_t>(m + 2));
    t.c[0] = {BigRat(1)};
    for (int j = 0; j <= m; ++j) {
        auto& next = t.c[static_cast<std::size_t>(j + 1)];
        next.resize(static_cast<std::size_t>(j + 2));
        next[0] = free[static_cast<std::size_t>(j)];
        for (int i = 0; i <= j; ++i) {
            BigRat f(2 * i + 1, 2 * i + 2);
            f.canonicalize();
            next[static_cast<std::size_t>(i + 1)] = f * (cbar - i * (i + 1)) * t.c[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
        }
    }
    return t;
}

RatFunc BCTable::p(int j) const {
    if (j < 0 || j > m + 1) throw InvalidInput("p_j index out of range");
    RatFunc tt = RatFunc::variable(1, 0);
    RatFunc out(1);
    for (int i = 0; i <= j; ++i) {
        const BigRat& cji = c[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
        if (sgn(cji) != 0) out += tt.pow(-2 * i) * cji;
    }
    return out;
}

BigRat obstruction(const BigRat& cbar, int m) {
    if (m < 0) throw InvalidInput("m must be non-negative");
    BigRat prod = 1;
    for (int k = 0; k <= m; ++k) {
        BigRat f(2 * k + 1, 2 * k + 2);
        f.canonicalize();
        prod *= f * (cbar - k * (k + 1));
    }
    return prod;
}

DiffOp L1(const BigRat& cbar) {
    DiffOp d = -DiffOp::partial(1, 0, 0, 2);
    if (sgn(cbar) != 0) d += DiffOp::scalar(1, RatFunc::variable(1, 0).pow(-2) * cbar);
    return d;
}

DiffOp build_Am(int k) {
    if (k < 0) throw InvalidInput("k must be non-negative");
    BigRat cbar = k * (k + 1);
    BCTable t = bc_recursion(cbar, k, std::vector<BigRat>(static_cast<std::size_t>(k + 1)));
    DiffOp L = L1(cbar);
    // L^(m-j), built upward.
    std::vector<DiffOp> Lpow{DiffOp::scalar(1, RatFunc::constant(1, 1))};
    for (int i = 1; i <= k; ++i) Lpow.push_back(compose(Lpow.back(), L));
    DiffOp A(1);
    for (int j = 0; j <= k; ++j) {
        RatFunc pj = t.p(j);
        DiffOp head = DiffOp::term(1, Monomial::var(0), pj) + DiffOp::scalar(1, pj.derivative(0) * BigRat(-1, 2));
        A += compose(head, Lpow[static_cast<std::size_t>(k - j)]);
    }
    return A;
}

std::vector<ReductionFailure> reduction_residuals(const std::vector<SymbolPart>& q, const RatFunc& cbar, int nvars) {
    int m0 = static_cast<int>(q.size()) - 1;
    auto Q = [&](int k) -> const SymbolPart* {
        return k >= 0 && k <= m0 ? &q[static_cast<std::size_t>(k)] : nullptr;
    };
    std::vector<ReductionFailure> out;
    for (int K = 0; K <= m0; ++K) {
        std::map<Monomial, std::vector<RatFunc>> acc;
        if (const auto* next = Q(K + 1))
            for (const auto& [p, c] : *next) acc[p * Monomial::var(0)].push_back(c * BigRat(-2 * (K + 1)));
        if (K > 0)
            for (const auto& [p, c] : *Q(K)) acc[p].push_back(c * BigRat(K * (K + 1)));
        for (int l = 1; l <= K; ++l) {
            BigRat sign = l % 2 ? -(l + 1) : (l + 1);
            for (const auto& [p, c] : *Q(K - l)) {
                int r = p.exponent(0);
                if (r < l) continue;
                BigRat falling = 1;
                for (int i = 0; i < l; ++i) falling *= r - i;
                acc[p.with_exponent(0, r - l)].push_back(c * cbar * (sign * falling));
            }
        }
        for (auto& [p, parts] : acc) {
            RatFunc s = sum(parts, nvars);
            if (!s.is_zero()) out.push_back({K, p, std::move(s)});
        }
    }
    return out;
}

namespace {

/// C_alpha from the potential of L (coefficient of t^-2 in the frame of alpha).
RatFunc extract_coupling(const DiffOp& Ly, int n) {
    int nv = Ly.nvars();
    RatFunc R = Ly.coeff(Monomial());
    if (R.is_zero()) return RatFunc(nv);
    LaurentSlice s = laurent_in_var(R, 0, -2);
    if (s.min_order < -2) throw InvalidInput("potential has a pole of order above two along the root");
    RatFunc c = s.coeff(-2);
    for (int i = 0; i < n; ++i)
        if (c.depends_on(i)) throw InvalidInput("inverse-square coefficient along the root is not constant");
    return c;
}

void check_schrodinger(const DiffOp& L) {
    int n = L.ndiff();
    for (const auto& [p, c] : L.terms()) {
        if (p.is_one()) continue;
        bool lap = p.degree() == 2 && [&] {
            for (int i = 0; i < n; ++i)
                if (p.exponent(i) == 2) return true;
            return false;
        }();
        if (!lap || !(c == RatFunc::constant(L.nvars(), -1)))
            throw InvalidInput("L is not of the form -Laplacian + potential");
    }
    if (L.order() != 2) throw InvalidInput("L is not of the form -Laplacian + potential");
}

}  // namespace

ReductionResult rank_one_reduce(const DiffOp& P, const DiffOp& L, const RootVector& alpha) {
    P.check_compatible(L);
    int n = P.ndiff();
    int nv = P.nvars();
    if (alpha.dim() != n) throw InvalidInput("root dimension does not match the operators");
    check_schrodinger(L);
    if (P.is_zero()) throw InvalidInput("P is zero");
    if (!principal_symbol(P).is_constant_in_x()) throw InvalidInput("principal symbol of P depends on x");

    ReductionResult res;
    res.alpha = alpha;
    res.frame = complete_frame(alpha.coords);
    DiffOp Py = change_coords_linear(P, res.frame.rows);
    DiffOp Ly = change_coords_linear(L, res.frame.rows);
    res.cbar = extract_coupling(Ly, n) * (1 / alpha.squared_norm);

    auto parts = symbol_parts(Py);
    int m0 = static_cast<int>(parts.size()) - 1;
    res.qtables.resize(parts.size());
    res.pole_orders.assign(parts.size(), 0);
    for (int k = 0; k <= m0; ++k) {
        for (const auto& [p, a] : parts[static_cast<std::size_t>(k)]) {
            int po = order_in_var(a, 0);
            auto& slot = res.pole_orders[static_cast<std::size_t>(k)];
            slot = std::max(slot, po);
            if (po > k) {
                std::ostringstream os;
                os << "commutation already impossible: grade " << k << " has a pole of order " << po << " along "
                   << alpha.to_string();
                throw ReductionError(os.str());
            }
            if (po < k) continue;
            RatFunc q = laurent_in_var(a, 0, -k).coeff(-k);
            if (!q.is_zero()) res.qtables[static_cast<std::size_t>(k)].emplace(p, std::move(q));
        }
    }
    res.failures = reduction_residuals(res.qtables, res.cbar, nv);

    // Direct one-variable check: t is the only differential variable, the frame
    // coordinates y' and all parameters ride along as parameters.
    std::map<Monomial, DiffOp> by_eta;
    RatFunc t = RatFunc::variable(nv, 0);
    for (int k = 0; k <= m0; ++k)
        for (const auto& [p, c] : res.qtables[static_cast<std::size_t>(k)]) {
            Monomial eta_rest = p.without(0);
            auto [it, inserted] = by_eta.try_emplace(eta_rest, DiffOp(1, nv - 1));
            it->second += DiffOp::term(1, Monomial::var(0, p.exponent(0)), c * t.pow(-k));
        }
    DiffOp L1y = -DiffOp::partial(1, nv - 1, 0, 2) + DiffOp::scalar(1, res.cbar * t.pow(-2));
    res.onevar_zero = true;
    for (const auto& [eta, Q] : by_eta)
        if (!commutator(L1y, Q).is_zero()) res.onevar_zero = false;
    return res;
}

std::vector<InvarianceCheck> invariance_gate(const DiffOp& P, const Arrangement& arr) {
    if (arr.nvars() != P.ndiff()) throw InvalidInput("arrangement dimension does not match the operator");
    SymbolPoly sym = principal_symbol(P);
    if (!sym.is_constant_in_x()) throw InvalidInput("principal symbol of P depends on x");
    Poly f = sym.xi_only();
    std::vector<InvarianceCheck> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const auto& r = arr.roots()[i];
        std::optional<Genericity> g;
        if (arr.couplings()[i]) g = is_generic(*arr.couplings()[i], r.squared_norm);
        out.push_back({r, g, is_invariant(f, reflection_matrix(r))});
    }
    return out;
}

}  // namespace invsq
