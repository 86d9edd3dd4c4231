#ifndef INVSQ_CMS_MODELS_HPP
#define INVSQ_CMS_MODELS_HPP

#include "invsq/diffop.hpp"
#include "invsq/reflection.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace invsq {

/// Potential data. A coupling left unset is symbolic: it becomes a parameter
/// variable of the operators (C first, then C0, after the coordinates).
struct PotentialSpec {
    enum class Kind { rational, wp_series };
    Kind kind = Kind::rational;
    std::optional<BigRat> C = BigRat(1);   // roots e_i +- e_j
    std::optional<BigRat> C0 = BigRat(0);  // roots e_i
    /// When set, C_alpha = m(m+1)<alpha,alpha> for every root.
    std::optional<int> m;
    // Series invariants; unset ones stay symbolic.
    std::optional<BigRat> g2;
    std::optional<BigRat> g3;
    int N = 12;
    BigRat c1 = 1;
    BigRat c2 = 0;

    std::vector<std::string> parameter_names() const;
    int nparams() const { return static_cast<int>(parameter_names().size()); }
    /// Coupling of root r as a constant function on n coordinates plus parameters.
    RatFunc coupling(const RootVector& r, int n) const;
};

/// -Laplacian + sum C_alpha / <alpha, x>^2 with couplings taken from spec by root shape.
DiffOp build_L(const Arrangement& arr, const PotentialSpec& spec);
/// Same with the arrangement's own couplings (all must be known).
DiffOp build_L(const Arrangement& arr);

DiffOp build_P_typeA(int n, const PotentialSpec& spec);

/// Raised when the zeroth-order coefficient cannot be integrated.
class IntegrationError : public MathError {
public:
    IntegrationError(const std::string& what, std::vector<std::string> unmatched)
        : MathError(what), unmatched_terms(std::move(unmatched)) {}
    std::vector<std::string> unmatched_terms;
};

DiffOp build_P_typeBD(int n, const PotentialSpec& spec, RootType type);

struct CommutantReport {
    bool zero = true;
    int ndiff = 0;
    /// grade k = order(P) - |p| -> nonzero coefficients of [L, P].
    std::map<int, std::vector<std::pair<Monomial, RatFunc>>> residual_by_grade;
};

CommutantReport verify_commutant(const DiffOp& L, const DiffOp& P);

/// Even truncated series t^-2 + sum_{k=2}^{N} c_k t^(2k-2) with c_k in Q[g2, g3].
struct WpSeries {
    int N = 0;
    std::vector<Poly> c;  // c[k] for k = 0..N, c[0] = c[1] = 0; polynomials in (g2, g3)

    /// Laurent coefficients: power of t -> coefficient in Q[g2, g3].
    std::map<int, Poly> laurent() const;
};

WpSeries wp_series(int N);
/// (wp')^2 - 4 wp^3 + g2 wp + g3 for the truncated series, by power of t (zero entries dropped).
std::map<int, Poly> wp_ode_residual(const WpSeries& s);

struct A7Result {
    bool vanishes = false;
    /// For a rational u: lowest order of the left side along x1 - x2.
    /// For the series: lowest x-degree with a nonzero homogeneous part.
    std::optional<int> first_failing_order;
    /// Series check only: the degrees that were compared.
    std::vector<int> checked_degrees;
};

/// u(t) = C/t^2 (C symbolic when spec.C is unset) for the rational kind.
A7Result functional_eq_A7_check(int n, const PotentialSpec& spec);
/// Any odd or even rational u(t), given as a function of one variable (nvars = 1 + nparams).
A7Result functional_eq_A7_check(int n, const RatFunc& u);

/// Named coupling unknowns over the full positive system of one type.
struct ConstraintSystem {
    RootType type = RootType::A;
    int n = 0;
    std::vector<std::string> names;  // C12, Cm12, Cp12, C1 ...
    std::vector<RootVector> roots;   // aligned with names
    /// factor * (plus - minus) = 0, indices into names.
    struct Equation {
        int factor;
        int plus;
        int minus;
        std::string family;
    };
    std::vector<Equation> equations;
    /// Constants the derivation introduces and then normalizes to zero.
    std::vector<std::pair<std::string, BigRat>> normalization;

    int index_of(const std::string& name) const;
    std::string equation_string(const Equation& e) const;
};

/// Infers the type from the root shapes unless given. Roots must be lines of
/// e_i - e_j, e_i + e_j or e_i.
ConstraintSystem residue_constraints(const Arrangement& arr, std::optional<RootType> type = std::nullopt);

struct Seed {
    enum class Kind { nonzero, differs, equals };
    Kind kind;
    std::string a;
    std::string b;
};

/// Facts implied by an arrangement: listed roots are nonzero, equal known values
/// are equal, distinct known values differ.
std::vector<Seed> seeds_from_arrangement(const ConstraintSystem& cs, const Arrangement& arr);

struct Verdict {
    enum class Kind { full_positive_system, d_inside_b, contradicts_w, fails_I2, contradiction, ambiguous };
    Kind kind = Kind::contradiction;
    std::string label;  // e.g. "B2", "A3-type"
    /// Surviving supports (one per leaf) as lists of unknown names that are nonzero.
    std::vector<std::vector<std::string>> supports;
    /// Per orbit: every surviving leaf forces the orbit's couplings equal.
    std::map<std::string, bool> equal_per_orbit;
    std::string to_string() const;
};
const char* to_string(Verdict::Kind k);

/// cap bounds the reflection groups generated while labelling leaves; InvalidInput when reached.
Verdict classify_arrangement(const ConstraintSystem& cs, const std::vector<Seed>& seeds,
                             std::size_t cap = kDefaultGroupCap);
/// residue_constraints + seeds_from_arrangement + extra seeds; an arrangement that
/// spans but splits orthogonally is reported as fails_I2 right away.
Verdict classify_arrangement(const Arrangement& arr, std::optional<RootType> type, const std::vector<Seed>& extra = {},
                             std::size_t cap = kDefaultGroupCap);

struct D4TwistResult {
    bool plus = false;
    bool minus = false;
    bool control_differs = false;
    bool ok() const { return plus && minus && control_differs; }
};
D4TwistResult d4_twist_check();
/// The half-integer orthogonal matrix of the D4 twist for one sign.
Matrix d4_twist_matrix(int sign);

}  // namespace invsq

#endif  // INVSQ_CMS_MODELS_HPP
