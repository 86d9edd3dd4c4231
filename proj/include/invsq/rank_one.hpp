#ifndef INVSQ_RANK_ONE_HPP
#define INVSQ_RANK_ONE_HPP

#include "invsq/diffop.hpp"
#include "invsq/laurent.hpp"
#include "invsq/reflection.hpp"

#include <optional>
#include <string>
#include <vector>

namespace invsq {

/// Result of the genericity test: k is set when C / normsq = k(k+1), k >= 0.
struct Genericity {
    std::optional<int> k;
    bool generic() const { return !k.has_value(); }
    std::string to_string() const;
};

Genericity is_generic(const BigRat& C, const BigRat& normsq);

/// Triangular table c[j][i], 0 <= i <= j <= m+1.
struct BCTable {
    BigRat cbar;
    int m = 0;
    std::vector<std::vector<BigRat>> c;

    /// p_j = sum_i c_{j,i} t^(-2i) as a function of t (nvars = 1).
    RatFunc p(int j) const;
};

/// free holds c_{1,0}..c_{m+1,0}.
BCTable bc_recursion(const BigRat& cbar, int m, const std::vector<BigRat>& free);

/// c_{m+1,m+1} with c_{0,0} = 1: prod_{k=0}^{m} (2k+1)/(2k+2) (cbar - k(k+1)).
BigRat obstruction(const BigRat& cbar, int m);

/// -d^2/dt^2 + cbar / t^2.
DiffOp L1(const BigRat& cbar);

/// Odd-order commutant of L1(k(k+1)) with all free constants zero.
DiffOp build_Am(int k);

/// Thrown when a pole along the reduction hyperplane is already too strong for [L, P] = 0.
class ReductionError : public MathError {
public:
    using MathError::MathError;
};

struct ReductionFailure {
    int k;
    Monomial eta;  // monomial in the frame symbols (eta_1 is the symbol of d/dt)
    RatFunc residual;
};

struct ReductionResult {
    RootVector alpha{{1}};
    Frame frame;
    RatFunc cbar;                    // C_alpha / <alpha, alpha>, possibly in parameters
    std::vector<SymbolPart> qtables;  // Q_k for k = 0..order(P); coefficients free of t
    std::vector<int> pole_orders;    // pole order of P_k along t = 0 (0 when regular)
    std::vector<ReductionFailure> failures;
    bool onevar_zero = false;  // [L1, sum_k t^-k Q_k] = 0 computed directly

    bool ok() const { return failures.empty() && onevar_zero; }
};

/// Rank-one reduction of [L, P] = 0 along the hyperplane of alpha, in the scaled
/// frame t = <alpha, x>. L must be -Laplacian + potential with a pole of order at most
/// two along alpha; P must have a principal symbol constant in x.
ReductionResult rank_one_reduce(const DiffOp& P, const DiffOp& L, const RootVector& alpha);

/// Residual of the reduction equations for given tables (exposed for tests).
std::vector<ReductionFailure> reduction_residuals(const std::vector<SymbolPart>& q, const RatFunc& cbar, int nvars);

struct InvarianceCheck {
    RootVector root;
    std::optional<Genericity> genericity;  // unset when the coupling is unknown
    bool invariant;
    /// Generic coupling without invariance: [L, P] = 0 is impossible.
    bool violation() const { return genericity && genericity->generic() && !invariant; }
};

std::vector<InvarianceCheck> invariance_gate(const DiffOp& P, const Arrangement& arr);

}  // namespace invsq

#endif  // INVSQ_RANK_ONE_HPP
