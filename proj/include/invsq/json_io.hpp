#ifndef INVSQ_JSON_IO_HPP
#define INVSQ_JSON_IO_HPP

#include "invsq/cms_models.hpp"
#include "invsq/rank_one.hpp"

#include <json.hpp>

namespace invsq {

using Json = nlohmann::ordered_json;

// Every rational is written as "p/q". Readers also take bare integers, "p"
// strings and JSON integers; anything malformed raises InvalidInput.

BigRat rat_from_json(const Json& j);
Json rat_to_json(const BigRat& r);

/// {"nvars": n, "num": [{"c": "p/q", "e": [...]}, ...], "den": [...]}; den is omitted for polynomials.
Json to_json(const Poly& p);
Json to_json(const RatFunc& f);
Poly poly_from_json(const Json& j);
RatFunc ratfunc_from_json(const Json& j);

/// {"nvars": n, "nparams": k, "terms": [{"dx": [...], "coeff": <ratfunc>}]}.
Json to_json(const DiffOp& d);
DiffOp diffop_from_json(const Json& j);

/// {"nvars": n, "roots": [{"v": ["p/q", ...], "C": "p/q"}]}; "C" may be omitted (unknown).
Json to_json(const Arrangement& a);
Arrangement arrangement_from_json(const Json& j);

/// {"kind": "rational"|"wp_series", "C": ..., "C0": ..., "m": ..., "g2": ..., "g3": ..., "N": ...}.
/// A coupling or invariant given as null or "symbolic" stays symbolic.
Json to_json(const PotentialSpec& s);
PotentialSpec potential_from_json(const Json& j);

std::vector<Seed> seeds_from_json(const Json& j);

Json to_json(const CommutantReport& r);
Json to_json(const ReductionResult& r);
Json to_json(const Verdict& v);
Json to_json(const A7Result& r);
Json to_json(const ConstraintSystem& cs);

}  // namespace invsq

#endif  // INVSQ_JSON_IO_HPP
