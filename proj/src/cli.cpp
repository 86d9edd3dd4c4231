#include "invsq/cli.hpp"

#include "invsq/json_io.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <sstream>

namespace invsq {

namespace {

enum class Format { human, json };

struct ModelArgs {
    std::string type;
    int n = 0;
    std::string C = "1";
    std::string C0 = "0";
    std::optional<int> m;
};

std::optional<BigRat> rat_or_symbolic(const std::string& s) {
    if (s == "symbolic") return std::nullopt;
    return parse_rat(s);
}

PotentialSpec rational_spec(const ModelArgs& a) {
    PotentialSpec s;
    s.C = rat_or_symbolic(a.C);
    s.C0 = rat_or_symbolic(a.C0);
    s.m = a.m;
    if (s.m && *s.m < 0) throw InvalidInput("m must be non-negative");
    return s;
}

// A path, or the JSON text itself when it starts with '{'.
Json load_json(const std::string& in) {
    std::string text = in;
    auto first = in.find_first_not_of(" \t\r\n");
    if (first == std::string::npos || in[first] != '{') {
        std::ifstream f(in);
        if (!f) throw InvalidInput("cannot read '" + in + "'");
        std::stringstream ss;
        ss << f.rdbuf();
        text = ss.str();
    }
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw InvalidInput(std::string("malformed JSON: ") + e.what());
    }
}

std::pair<DiffOp, DiffOp> build_pair(RootType type, int n, const PotentialSpec& spec) {
    DiffOp L = build_L(positive_system(type, n), spec);
    DiffOp P = type == RootType::A ? build_P_typeA(n, spec) : build_P_typeBD(n, spec, type);
    return {L, P};
}

std::string exps_string(const Monomial& m, int n) {
    std::string s = "(";
    auto e = m.exponents(n);
    for (std::size_t i = 0; i < e.size(); ++i) s += (i ? "," : "") + std::to_string(e[i]);
    return s + ")";
}

void emit(std::ostream& out, const Json& j) { out << j.dump(2) << '\n'; }

std::string join(const std::vector<std::string>& v, const char* sep) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + v[i];
    return s;
}

int cmd_build(const ModelArgs& a, Format fmt, std::ostream& out) {
    RootType type = parse_root_type(a.type);
    PotentialSpec spec = rational_spec(a);
    auto [L, P] = build_pair(type, a.n, spec);
    if (fmt == Format::json) {
        emit(out, {{"type", to_string(type)}, {"n", a.n}, {"potential", to_json(spec)},
                   {"parameters", spec.parameter_names()}, {"L", to_json(L)}, {"P", to_json(P)}});
    } else {
        out << "L = " << L.to_string() << '\n' << "P = " << P.to_string() << '\n';
    }
    return 0;
}

int cmd_verify(const ModelArgs& a, const std::string& in, Format fmt, std::ostream& out) {
    Json head;
    DiffOp L, P;
    if (!in.empty()) {
        Json j = load_json(in);
        if (j.contains("L")) {
            L = diffop_from_json(j.at("L"));
            P = diffop_from_json(j.contains("P") ? j.at("P") : Json());
        } else {
            RootType type = parse_root_type(j.value("type", std::string()));
            if (!j.contains("n") || !j.at("n").is_number_integer()) throw InvalidInput("missing integer field 'n'");
            int n = j.at("n").get<int>();
            PotentialSpec spec = j.contains("potential") ? potential_from_json(j.at("potential")) : PotentialSpec{};
            head = {{"type", to_string(type)}, {"n", n}, {"potential", to_json(spec)}};
            std::tie(L, P) = build_pair(type, n, spec);
        }
    } else {
        RootType type = parse_root_type(a.type);
        PotentialSpec spec = rational_spec(a);
        head = {{"type", to_string(type)}, {"n", a.n}, {"potential", to_json(spec)}};
        std::tie(L, P) = build_pair(type, a.n, spec);
    }
    CommutantReport r = verify_commutant(L, P);
    if (fmt == Format::json) {
        Json j = head.is_null() ? Json::object() : head;
        Json body = to_json(r);
        for (auto& [k, v] : body.items()) j[k] = v;
        emit(out, j);
    } else if (r.zero) {
        out << "[L, P] = 0\n";
    } else {
        out << "[L, P] != 0\n";
        for (const auto& [k, entries] : r.residual_by_grade)
            out << "  grade " << k << ": " << entries.size() << " nonzero coefficient(s)\n";
        if (!r.residual_by_grade.empty()) {
            const auto& [p, c] = r.residual_by_grade.begin()->second.front();
            out << "  first: d^" << exps_string(p, r.ndiff) << " -> " << c.to_string() << '\n';
        }
    }
    return r.zero ? 0 : 1;
}

int cmd_obstruct(const std::string& C, const std::string& normsq, int m, Format fmt, std::ostream& out) {
    if (m < 0) throw InvalidInput("m must be non-negative");
    BigRat c = parse_rat(C), ns = parse_rat(normsq);
    Genericity g = is_generic(c, ns);
    BigRat cbar = c / ns;
    Json rows = Json::array();
    for (int j = 0; j <= m; ++j) rows.push_back({{"m", j}, {"obstruction", rat_to_json(obstruction(cbar, j))}});
    if (fmt == Format::json) {
        emit(out, {{"C", rat_to_json(c)}, {"normsq", rat_to_json(ns)}, {"cbar", rat_to_json(cbar)},
                   {"genericity", g.to_string()}, {"obstruction", rows}});
    } else {
        out << "cbar = " << pretty_rat(cbar) << ": " << g.to_string() << '\n';
        for (const auto& r : rows) out << "  m = " << r["m"].get<int>() << "  " << r["obstruction"].get<std::string>() << '\n';
    }
    return 0;
}

int cmd_classify(const std::string& in, const std::string& type, std::size_t cap, Format fmt, std::ostream& out) {
    if (in.empty()) throw InvalidInput("classify needs --in");
    Json j = load_json(in);
    Arrangement arr = arrangement_from_json(j);
    std::vector<Seed> seeds = j.contains("seeds") ? seeds_from_json(j.at("seeds")) : std::vector<Seed>{};
    std::optional<RootType> t;
    if (!type.empty()) t = parse_root_type(type);
    else if (j.contains("type")) t = parse_root_type(j.at("type").get<std::string>());
    Verdict v = classify_arrangement(arr, t, seeds, cap);
    if (fmt == Format::json) {
        emit(out, to_json(v));
    } else {
        out << v.to_string() << '\n';
        for (const auto& s : v.supports) out << "  support: " << join(s, " ") << '\n';
        for (const auto& [orbit, eq] : v.equal_per_orbit) out << "  " << orbit << (eq ? " equal" : " not forced equal") << '\n';
    }
    switch (v.kind) {
        case Verdict::Kind::full_positive_system:
        case Verdict::Kind::d_inside_b:
        case Verdict::Kind::ambiguous: return 0;
        default: return 1;
    }
}

RootVector parse_alpha(const std::string& s) {
    std::vector<BigRat> c;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) c.push_back(parse_rat(item));
    if (c.empty()) throw InvalidInput("empty --alpha");
    return RootVector(c);
}

int cmd_reduce(const ModelArgs& a, const std::string& in, const std::string& alpha, Format fmt, std::ostream& out) {
    DiffOp L, P;
    std::optional<RootVector> al;
    if (!alpha.empty()) al = parse_alpha(alpha);
    if (!in.empty()) {
        Json j = load_json(in);
        if (!j.contains("L") || !j.contains("P")) throw InvalidInput("reduce input needs \"L\" and \"P\"");
        L = diffop_from_json(j.at("L"));
        P = diffop_from_json(j.at("P"));
        if (!al && j.contains("alpha")) {
            std::vector<BigRat> c;
            for (const auto& x : j.at("alpha")) c.push_back(rat_from_json(x));
            al = RootVector(c);
        }
    } else {
        std::tie(L, P) = build_pair(parse_root_type(a.type), a.n, rational_spec(a));
    }
    if (!al) throw InvalidInput("reduce needs --alpha or \"alpha\" in the input");
    if (al->dim() != L.ndiff()) throw InvalidInput("alpha length must equal the number of coordinates");
    try {
        ReductionResult r = rank_one_reduce(P, L, *al);
        if (fmt == Format::json) {
            emit(out, to_json(r));
        } else {
            out << "alpha = " << r.alpha.to_string() << ", cbar = " << r.cbar.to_string() << '\n';
            out << "pole orders:";
            for (int p : r.pole_orders) out << ' ' << p;
            out << '\n' << (r.ok() ? "reduction holds" : "reduction fails") << '\n';
            for (const auto& f : r.failures)
                out << "  k = " << f.k << ", eta^" << exps_string(f.eta, r.alpha.dim()) << ": " << f.residual.to_string() << '\n';
        }
        return r.ok() ? 0 : 1;
    } catch (const ReductionError& e) {
        if (fmt == Format::json) emit(out, {{"ok", false}, {"error", e.what()}});
        else out << "reduction fails: " << e.what() << '\n';
        return 1;
    }
}

struct SeriesArgs {
    std::string kind = "wp";
    std::string g2 = "symbolic";
    std::string g3 = "symbolic";
    std::string C = "symbolic";
    std::string c1 = "1";
    std::string c2 = "0";
    int N = 12;
    int n = 3;
    int power = -1;
};

int cmd_series(const SeriesArgs& a, Format fmt, std::ostream& out) {
    Json j{{"kind", a.kind}, {"n", a.n}};
    A7Result r;
    std::optional<int> ode_lowest;
    if (a.kind == "wp") {
        PotentialSpec s;
        s.kind = PotentialSpec::Kind::wp_series;
        s.g2 = rat_or_symbolic(a.g2);
        s.g3 = rat_or_symbolic(a.g3);
        s.N = a.N;
        s.c1 = parse_rat(a.c1);
        s.c2 = parse_rat(a.c2);
        if (s.N < 2) throw InvalidInput("N must be at least 2");
        j["potential"] = to_json(s);
        r = functional_eq_A7_check(a.n, s);
        auto res = wp_ode_residual(wp_series(a.N));
        if (!res.empty()) ode_lowest = res.begin()->first;
    } else if (a.kind == "rational") {
        PotentialSpec s;
        s.C = rat_or_symbolic(a.C);
        j["potential"] = to_json(s);
        r = functional_eq_A7_check(a.n, s);
    } else if (a.kind == "power") {
        j["power"] = a.power;
        r = functional_eq_A7_check(a.n, RatFunc::variable(1, 0).pow(a.power));
    } else {
        throw InvalidInput("unknown series kind '" + a.kind + "'");
    }
    Json body = to_json(r);
    for (auto& [k, v] : body.items()) j[k] = v;
    if (a.kind == "wp") j["ode_residual_lowest_power"] = ode_lowest ? Json(*ode_lowest) : Json(nullptr);
    if (fmt == Format::json) {
        emit(out, j);
    } else {
        out << (r.vanishes ? "vanishes" : "does not vanish");
        if (r.first_failing_order) out << "; first failing order " << *r.first_failing_order;
        out << '\n';
        if (ode_lowest) out << "  series ODE residual starts at t^" << *ode_lowest << '\n';
    }
    return r.vanishes ? 0 : 1;
}

void add_model_flags(CLI::App* c, ModelArgs& a, bool required) {
    auto* t = c->add_option("--type", a.type, "root system type A, B or D");
    auto* n = c->add_option("--n", a.n, "number of coordinates");
    if (required) {
        t->required();
        n->required();
    }
    c->add_option("--C", a.C, "coupling on e_i +- e_j, \"p/q\" or symbolic");
    c->add_option("--C0", a.C0, "coupling on e_i (type B), \"p/q\" or symbolic");
    c->add_option("--m", a.m, "set every coupling to m(m+1)|alpha|^2");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Exact checks for inverse-square quantum integrable systems"};
    app.require_subcommand(1, 1);
    std::string format = "human";
    app.add_option("--format", format, "human or json")->check(CLI::IsMember({"human", "json"}));

    ModelArgs model;
    std::string in, alpha, classify_type;
    std::size_t cap = kDefaultGroupCap;
    std::string C = "", normsq = "1";
    int m = 0;
    SeriesArgs series;

    auto* build = app.add_subcommand("build", "print L and P as operator JSON");
    add_model_flags(build, model, true);

    auto* verify = app.add_subcommand("verify", "check [L, P] = 0");
    add_model_flags(verify, model, false);
    verify->add_option("--in", in, "{\"L\", \"P\"} operators or {\"type\", \"n\", \"potential\"}");

    auto* obstruct = app.add_subcommand("obstruct", "one-variable obstruction table");
    obstruct->add_option("--C", C, "coupling")->required();
    obstruct->add_option("--normsq", normsq, "squared root length");
    obstruct->add_option("--m", m, "largest m");

    auto* classify = app.add_subcommand("classify", "classify an arrangement by its residue constraints");
    classify->add_option("--in", in, "arrangement JSON, path or inline")->required();
    classify->add_option("--type", classify_type, "constraint type A, B or D");
    classify->add_option("--cap", cap, "reflection group size cap");

    auto* reduce = app.add_subcommand("reduce", "rank-one reduction along a root");
    add_model_flags(reduce, model, false);
    reduce->add_option("--in", in, "{\"L\", \"P\", \"alpha\"}");
    reduce->add_option("--alpha", alpha, "root, comma separated");

    auto* sc = app.add_subcommand("series-check", "zeroth-order functional equation for a potential");
    sc->add_option("--kind", series.kind, "wp, rational or power")->check(CLI::IsMember({"wp", "rational", "power"}));
    sc->add_option("--g2", series.g2);
    sc->add_option("--g3", series.g3);
    sc->add_option("--N", series.N, "series truncation");
    sc->add_option("--n", series.n, "number of coordinates");
    sc->add_option("--C", series.C, "rational kind coupling");
    sc->add_option("--c1", series.c1, "wp kind scale");
    sc->add_option("--c2", series.c2, "wp kind shift");
    sc->add_option("--power", series.power, "power kind exponent");

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    Format fmt = format == "json" ? Format::json : Format::human;
    try {
        if (*build) return cmd_build(model, fmt, out);
        if (*verify) {
            if (in.empty() && (model.type.empty() || model.n == 0)) throw InvalidInput("verify needs --type and --n, or --in");
            return cmd_verify(model, in, fmt, out);
        }
        if (*obstruct) return cmd_obstruct(C, normsq, m, fmt, out);
        if (*classify) return cmd_classify(in, classify_type, cap, fmt, out);
        if (*reduce) {
            if (in.empty() && (model.type.empty() || model.n == 0)) throw InvalidInput("reduce needs --type and --n, or --in");
            return cmd_reduce(model, in, alpha, fmt, out);
        }
        if (*sc) return cmd_series(series, fmt, out);
    } catch (const InvalidInput& e) {
        err << "invalid input: " << e.what() << '\n';
        return 2;
    } catch (const Json::exception& e) {
        err << "invalid input: " << e.what() << '\n';
        return 2;
    } catch (const IntegrationError& e) {
        err << "integration failed: " << e.what() << '\n';
        for (const auto& t : e.unmatched_terms) err << "  " << t << '\n';
        return 1;
    } catch (const MathError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace invsq
