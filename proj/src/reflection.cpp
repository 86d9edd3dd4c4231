#include "invsq/reflection.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>

namespace invsq {

RootVector::RootVector(std::vector<BigRat> c) : coords(std::move(c)) {
    if (std::all_of(coords.begin(), coords.end(), [](const BigRat& x) { return sgn(x) == 0; }))
        throw InvalidInput("root vector is zero");
    squared_norm = dot(coords, coords);
}

bool RootVector::parallel_to(const RootVector& o) const {
    if (dim() != o.dim()) return false;
    BigRat d = dot(coords, o.coords);
    return d * d == squared_norm * o.squared_norm;
}

std::string RootVector::to_string() const {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < coords.size(); ++i) os << (i ? ", " : "") << pretty_rat(coords[i]);
    os << ")";
    return os.str();
}

Arrangement::Arrangement(int nvars) : nvars_(nvars) {
    if (nvars < 1) throw InvalidInput("arrangement needs at least one variable");
}

void Arrangement::add(RootVector root, std::optional<BigRat> coupling) {
    if (root.dim() != nvars_) throw InvalidInput("root " + root.to_string() + " has the wrong dimension");
    if (find(root)) throw InvalidInput("root " + root.to_string() + " is parallel to an existing root");
    if (coupling && sgn(*coupling) == 0) throw InvalidInput("coupling of root " + root.to_string() + " is zero");
    roots_.push_back(std::move(root));
    couplings_.push_back(coupling);
}

void Arrangement::set_coupling(std::size_t i, std::optional<BigRat> c) {
    if (c && sgn(*c) == 0) throw InvalidInput("couplings must be nonzero");
    couplings_.at(i) = c;
}

std::optional<std::size_t> Arrangement::find(const RootVector& v) const {
    for (std::size_t i = 0; i < roots_.size(); ++i)
        if (roots_[i].parallel_to(v)) return i;
    return std::nullopt;
}

RootType parse_root_type(const std::string& s) {
    if (s == "A") return RootType::A;
    if (s == "B") return RootType::B;
    if (s == "D") return RootType::D;
    throw InvalidInput("unknown root system type '" + s + "'");
}

const char* to_string(RootType t) {
    switch (t) {
        case RootType::A: return "A";
        case RootType::B: return "B";
        case RootType::D: return "D";
    }
    return "?";
}

Arrangement positive_system(RootType type, int n, std::string* warning) {
    if (n < 2) throw InvalidInput("positive systems need n >= 2");
    if (type == RootType::D && n < 3) throw InvalidInput("type D needs n >= 3");
    if (type == RootType::D && n == 3 && warning) *warning = "D3 coincides with A3";
    Arrangement arr(n);
    auto e = [n](int i, int j, int sj) {
        std::vector<BigRat> v(static_cast<std::size_t>(n));
        v[static_cast<std::size_t>(i)] = 1;
        if (j >= 0) v[static_cast<std::size_t>(j)] = sj;
        return RootVector(std::move(v));
    };
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            arr.add(e(i, j, -1), BigRat(1));
            if (type != RootType::A) arr.add(e(i, j, 1), BigRat(1));
        }
    if (type == RootType::B)
        for (int i = 0; i < n; ++i) arr.add(e(i, -1, 0), BigRat(1));
    return arr;
}

Matrix reflection_matrix(const RootVector& a) {
    int n = a.dim();
    Matrix r = Matrix::identity(n);
    BigRat f = BigRat(2) / a.squared_norm;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            r(i, j) -= f * a.coords[static_cast<std::size_t>(i)] * a.coords[static_cast<std::size_t>(j)];
    return r;
}

GroupClosure generate_group(const Arrangement& arr, std::size_t cap) {
    if (cap < 1) throw InvalidInput("group cap must be positive");
    GroupClosure g;
    for (const auto& r : arr.roots()) g.generators.push_back(reflection_matrix(r));
    std::set<Matrix> seen{Matrix::identity(arr.nvars())};
    std::deque<Matrix> frontier{Matrix::identity(arr.nvars())};
    g.elements.push_back(Matrix::identity(arr.nvars()));
    while (!frontier.empty()) {
        Matrix m = std::move(frontier.front());
        frontier.pop_front();
        for (const auto& s : g.generators) {
            Matrix p = s * m;
            if (!seen.insert(p).second) continue;
            if (seen.size() > cap) {
                g.capped = true;
                return g;
            }
            g.elements.push_back(p);
            frontier.push_back(std::move(p));
        }
    }
    return g;
}

const char* to_string(Irreducibility r) {
    switch (r) {
        case Irreducibility::yes: return "yes";
        case Irreducibility::fails_I1: return "fails_I1";
        case Irreducibility::fails_I2: return "fails_I2";
    }
    return "?";
}

Irreducibility is_irreducible(const Arrangement& arr) {
    std::vector<std::vector<BigRat>> rows;
    for (const auto& r : arr.roots()) rows.push_back(r.coords);
    if (rows.empty() || Matrix::from_rows(rows).rank() < arr.nvars()) return Irreducibility::fails_I1;
    std::size_t k = arr.size();
    std::vector<bool> reached(k);
    std::vector<std::size_t> stack{0};
    reached[0] = true;
    while (!stack.empty()) {
        std::size_t i = stack.back();
        stack.pop_back();
        for (std::size_t j = 0; j < k; ++j)
            if (!reached[j] && sgn(dot(arr.roots()[i].coords, arr.roots()[j].coords)) != 0) {
                reached[j] = true;
                stack.push_back(j);
            }
    }
    return std::all_of(reached.begin(), reached.end(), [](bool b) { return b; }) ? Irreducibility::yes
                                                                                   : Irreducibility::fails_I2;
}

bool is_invariant(const Poly& f, const Matrix& w) {
    int n = f.nvars();
    if (w.rows() != n || w.cols() != n) throw InvalidInput("matrix size does not match the polynomial");
    std::vector<Poly> images;
    for (int i = 0; i < n; ++i) {
        std::vector<BigRat> col(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) col[static_cast<std::size_t>(j)] = w(j, i);
        images.push_back(Poly::linear(n, col));
    }
    return f.substitute(images) == f;
}

bool is_invariant(const Poly& f, const GroupClosure& g) {
    if (g.capped) throw InvalidInput("group closure hit its cap; invariance cannot be certified");
    // Invariance under the generators is equivalent, and cheaper.
    return std::all_of(g.generators.begin(), g.generators.end(), [&f](const Matrix& w) { return is_invariant(f, w); });
}

}  // namespace invsq
