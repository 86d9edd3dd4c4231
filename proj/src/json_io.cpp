#include "invsq/json_io.hpp"

namespace invsq {

namespace {

const Json& field(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw InvalidInput(std::string("missing field '") + key + "'");
    return j.at(key);
}

int int_field(const Json& j, const char* key) {
    const Json& v = field(j, key);
    if (!v.is_number_integer()) throw InvalidInput(std::string("field '") + key + "' must be an integer");
    return v.get<int>();
}

std::optional<BigRat> optional_rat(const Json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    if (j.at(key).is_string() && j.at(key).get<std::string>() == "symbolic") return std::nullopt;
    return rat_from_json(j.at(key));
}

Json terms_json(const Poly& p) {
    Json out = Json::array();
    for (const auto& [m, c] : p.terms()) out.push_back({{"c", rat_to_json(c)}, {"e", m.exponents(p.nvars())}});
    return out;
}

Poly terms_from_json(const Json& arr, int nvars) {
    if (!arr.is_array()) throw InvalidInput("polynomial terms must be an array");
    std::vector<Poly::Term> terms;
    for (const auto& t : arr) {
        const Json& e = field(t, "e");
        if (!e.is_array() || static_cast<int>(e.size()) != nvars)
            throw InvalidInput("exponent vector length must equal nvars");
        std::vector<int> exps;
        for (const auto& x : e) {
            if (!x.is_number_integer() || x.get<int>() < 0) throw InvalidInput("exponents must be non-negative integers");
            exps.push_back(x.get<int>());
        }
        terms.emplace_back(Monomial::from_exponents(exps), rat_from_json(field(t, "c")));
    }
    return Poly::from_terms(nvars, std::move(terms));
}

std::vector<int> exps_of(const Monomial& m, int n) { return m.exponents(n); }

Json part_json(const SymbolPart& part, int n) {
    Json out = Json::array();
    for (const auto& [p, c] : part) out.push_back({{"eta", exps_of(p, n)}, {"coeff", to_json(c)}});
    return out;
}

}  // namespace

BigRat rat_from_json(const Json& j) {
    if (j.is_number_integer()) return BigRat(j.get<long>());
    if (j.is_string()) return parse_rat(j.get<std::string>());
    throw InvalidInput("expected an exact rational \"p/q\", got " + j.dump());
}

Json rat_to_json(const BigRat& r) { return format_rat(r); }

Json to_json(const Poly& p) { return {{"nvars", p.nvars()}, {"num", terms_json(p)}}; }

Json to_json(const RatFunc& f) {
    Json j{{"nvars", f.nvars()}, {"num", terms_json(f.num())}};
    if (!f.is_polynomial()) j["den"] = terms_json(f.den());
    return j;
}

Poly poly_from_json(const Json& j) {
    RatFunc f = ratfunc_from_json(j);
    if (!f.is_polynomial()) throw InvalidInput("expected a polynomial");
    return f.num();
}

RatFunc ratfunc_from_json(const Json& j) {
    int n = int_field(j, "nvars");
    if (n < 0 || n > Monomial::kMaxVars) throw InvalidInput("nvars out of range");
    Poly num = terms_from_json(field(j, "num"), n);
    if (!j.contains("den")) return RatFunc(num);
    Poly den = terms_from_json(j.at("den"), n);
    if (den.is_zero()) throw InvalidInput("zero denominator");
    return RatFunc::quotient(num, den);
}

Json to_json(const DiffOp& d) {
    Json terms = Json::array();
    for (const auto& [p, c] : d.terms()) terms.push_back({{"dx", p.exponents(d.ndiff())}, {"coeff", to_json(c)}});
    return {{"nvars", d.ndiff()}, {"nparams", d.nparams()}, {"terms", terms}};
}

DiffOp diffop_from_json(const Json& j) {
    int n = int_field(j, "nvars");
    int np = j.contains("nparams") ? int_field(j, "nparams") : 0;
    if (n < 1 || np < 0 || n + np > Monomial::kMaxVars) throw InvalidInput("operator variable counts out of range");
    DiffOp d(n, np);
    const Json& terms = field(j, "terms");
    if (!terms.is_array()) throw InvalidInput("operator terms must be an array");
    for (const auto& t : terms) {
        const Json& dx = field(t, "dx");
        if (!dx.is_array() || static_cast<int>(dx.size()) != n) throw InvalidInput("dx length must equal nvars");
        std::vector<int> p;
        for (const auto& x : dx) {
            if (!x.is_number_integer() || x.get<int>() < 0) throw InvalidInput("dx entries must be non-negative integers");
            p.push_back(x.get<int>());
        }
        RatFunc c = ratfunc_from_json(field(t, "coeff"));
        if (c.nvars() != n + np) throw InvalidInput("coefficient nvars must equal nvars + nparams");
        d += DiffOp::term(n, np, p, c);
    }
    return d;
}

Json to_json(const Arrangement& a) {
    Json roots = Json::array();
    for (std::size_t i = 0; i < a.size(); ++i) {
        Json v = Json::array();
        for (const auto& c : a.roots()[i].coords) v.push_back(rat_to_json(c));
        Json r{{"v", v}};
        if (a.couplings()[i]) r["C"] = rat_to_json(*a.couplings()[i]);
        roots.push_back(r);
    }
    return {{"nvars", a.nvars()}, {"roots", roots}};
}

Arrangement arrangement_from_json(const Json& j) {
    int n = int_field(j, "nvars");
    if (n < 1 || n > Monomial::kMaxVars) throw InvalidInput("nvars out of range");
    Arrangement a(n);
    const Json& roots = field(j, "roots");
    if (!roots.is_array()) throw InvalidInput("roots must be an array");
    for (const auto& r : roots) {
        const Json& v = field(r, "v");
        if (!v.is_array() || static_cast<int>(v.size()) != n) throw InvalidInput("root length must equal nvars");
        std::vector<BigRat> coords;
        for (const auto& x : v) coords.push_back(rat_from_json(x));
        a.add(RootVector(coords), optional_rat(r, "C"));
    }
    return a;
}

Json to_json(const PotentialSpec& s) {
    auto opt = [](const std::optional<BigRat>& v) { return v ? rat_to_json(*v) : Json("symbolic"); };
    Json j;
    if (s.kind == PotentialSpec::Kind::rational) {
        j = {{"kind", "rational"}, {"C", opt(s.C)}, {"C0", opt(s.C0)}};
        if (s.m) j["m"] = *s.m;
    } else {
        j = {{"kind", "wp_series"}, {"g2", opt(s.g2)}, {"g3", opt(s.g3)}, {"N", s.N},
             {"c1", rat_to_json(s.c1)}, {"c2", rat_to_json(s.c2)}};
    }
    return j;
}

PotentialSpec potential_from_json(const Json& j) {
    if (!j.is_object()) throw InvalidInput("potential spec must be an object");
    PotentialSpec s;
    std::string kind = j.value("kind", std::string("rational"));
    if (kind == "rational") {
        s.kind = PotentialSpec::Kind::rational;
        if (j.contains("C")) s.C = optional_rat(j, "C");
        if (j.contains("C0")) s.C0 = optional_rat(j, "C0");
        if (j.contains("m")) {
            s.m = int_field(j, "m");
            if (*s.m < 0) throw InvalidInput("m must be non-negative");
        }
    } else if (kind == "wp_series") {
        s.kind = PotentialSpec::Kind::wp_series;
        s.g2 = optional_rat(j, "g2");
        s.g3 = optional_rat(j, "g3");
        if (j.contains("N")) s.N = int_field(j, "N");
        if (j.contains("c1")) s.c1 = rat_from_json(j.at("c1"));
        if (j.contains("c2")) s.c2 = rat_from_json(j.at("c2"));
        if (s.N < 2) throw InvalidInput("N must be at least 2");
    } else {
        throw InvalidInput("unknown potential kind '" + kind + "'");
    }
    return s;
}

std::vector<Seed> seeds_from_json(const Json& j) {
    if (!j.is_array()) throw InvalidInput("seeds must be an array");
    std::vector<Seed> out;
    for (const auto& s : j) {
        std::string kind = field(s, "kind").get<std::string>();
        Seed seed;
        if (kind == "nonzero") seed.kind = Seed::Kind::nonzero;
        else if (kind == "differs") seed.kind = Seed::Kind::differs;
        else if (kind == "equals") seed.kind = Seed::Kind::equals;
        else throw InvalidInput("unknown seed kind '" + kind + "'");
        seed.a = field(s, "a").get<std::string>();
        if (seed.kind != Seed::Kind::nonzero) seed.b = field(s, "b").get<std::string>();
        out.push_back(seed);
    }
    return out;
}

Json to_json(const CommutantReport& r) {
    Json grades = Json::object();
    for (const auto& [k, entries] : r.residual_by_grade) {
        Json list = Json::array();
        for (const auto& [p, c] : entries) list.push_back({{"dx", p.exponents(r.ndiff)}, {"coeff", to_json(c)}});
        grades[std::to_string(k)] = list;
    }
    return {{"zero", r.zero}, {"residual_by_grade", grades}};
}

Json to_json(const ReductionResult& r) {
    int n = r.alpha.dim();
    Json alpha = Json::array();
    for (const auto& c : r.alpha.coords) alpha.push_back(rat_to_json(c));
    Json rows = Json::array();
    for (int i = 0; i < r.frame.rows.rows(); ++i) {
        Json row = Json::array();
        for (const auto& c : r.frame.rows.row(i)) row.push_back(rat_to_json(c));
        rows.push_back(row);
    }
    Json q = Json::array();
    for (std::size_t k = 0; k < r.qtables.size(); ++k) q.push_back({{"k", k}, {"terms", part_json(r.qtables[k], n)}});
    Json failures = Json::array();
    for (const auto& f : r.failures)
        failures.push_back({{"k", f.k}, {"eta", exps_of(f.eta, n)}, {"residual", to_json(f.residual)}});
    return {{"alpha", alpha}, {"frame", rows},           {"cbar", to_json(r.cbar)},
            {"pole_orders", r.pole_orders}, {"qtables", q}, {"failures", failures},
            {"onevar_zero", r.onevar_zero}, {"ok", r.ok()}};
}

Json to_json(const Verdict& v) {
    Json orbits = Json::object();
    for (const auto& [k, b] : v.equal_per_orbit) orbits[k] = b;
    return {{"verdict", to_string(v.kind)}, {"label", v.label}, {"supports", v.supports}, {"equal_per_orbit", orbits}};
}

Json to_json(const A7Result& r) {
    Json j{{"vanishes", r.vanishes}};
    j["first_failing_order"] = r.first_failing_order ? Json(*r.first_failing_order) : Json(nullptr);
    if (!r.checked_degrees.empty()) j["checked_degrees"] = r.checked_degrees;
    return j;
}

Json to_json(const ConstraintSystem& cs) {
    Json eqs = Json::array();
    for (const auto& e : cs.equations) eqs.push_back({{"family", e.family}, {"equation", cs.equation_string(e)}});
    Json norm = Json::object();
    for (const auto& [name, v] : cs.normalization) norm[name] = rat_to_json(v);
    return {{"type", to_string(cs.type)}, {"n", cs.n}, {"unknowns", cs.names}, {"equations", eqs}, {"normalization", norm}};
}

}  // namespace invsq
