#ifndef INVSQ_REFLECTION_HPP
#define INVSQ_REFLECTION_HPP

#include "invsq/matrix.hpp"
#include "invsq/poly.hpp"

#include <optional>
#include <string>
#include <vector>

namespace invsq {

struct RootVector {
    std::vector<BigRat> coords;
    BigRat squared_norm;

    explicit RootVector(std::vector<BigRat> c);
    int dim() const { return static_cast<int>(coords.size()); }
    bool parallel_to(const RootVector& o) const;
    friend bool operator==(const RootVector& a, const RootVector& b) { return a.coords == b.coords; }
    std::string to_string() const;
};

/// Pairwise non-parallel roots with their couplings. A coupling may be left
/// unknown (nullopt) for constraint propagation; known couplings are nonzero.
class Arrangement {
public:
    explicit Arrangement(int nvars = 0);

    void add(RootVector root, std::optional<BigRat> coupling = std::nullopt);

    int nvars() const { return nvars_; }
    std::size_t size() const { return roots_.size(); }
    const std::vector<RootVector>& roots() const { return roots_; }
    const std::vector<std::optional<BigRat>>& couplings() const { return couplings_; }
    void set_coupling(std::size_t i, std::optional<BigRat> c);
    /// Index of the root parallel to v, if any.
    std::optional<std::size_t> find(const RootVector& v) const;

private:
    int nvars_;
    std::vector<RootVector> roots_;
    std::vector<std::optional<BigRat>> couplings_;
};

enum class RootType { A, B, D };
RootType parse_root_type(const std::string& s);
const char* to_string(RootType t);

/// Positive system with unit couplings. Type A with n gives A_{n-1} in R^n.
/// D with n = 3 is allowed; *warning is then set.
Arrangement positive_system(RootType type, int n, std::string* warning = nullptr);

/// I - (2/<a,a>) a a^T.
Matrix reflection_matrix(const RootVector& a);

struct GroupClosure {
    std::vector<Matrix> elements;
    std::vector<Matrix> generators;
    bool capped = false;
    std::size_t order() const { return elements.size(); }
};

constexpr std::size_t kDefaultGroupCap = 10000;

/// Closure of the reflections of arr under multiplication. Stops with capped = true
/// once more than cap elements have been found.
GroupClosure generate_group(const Arrangement& arr, std::size_t cap = kDefaultGroupCap);

enum class Irreducibility { yes, fails_I1, fails_I2 };
const char* to_string(Irreducibility r);
Irreducibility is_irreducible(const Arrangement& arr);

/// f(w^T xi) = f(xi) for a polynomial in xi (nvars = matrix size).
bool is_invariant(const Poly& f, const Matrix& w);
/// Checks every element; throws InvalidInput when the group is capped.
bool is_invariant(const Poly& f, const GroupClosure& g);

}  // namespace invsq

#endif  // INVSQ_REFLECTION_HPP
