#ifndef INVSQ_TEST_RANDOM_HPP
#define INVSQ_TEST_RANDOM_HPP

#include "support/gen.hpp"

#include <catch2/catch_amalgamated.hpp>

namespace Catch {
template <>
struct StringMaker<invsq::RatFunc> {
    static std::string convert(const invsq::RatFunc& f) { return f.to_string(); }
};
template <>
struct StringMaker<invsq::Poly> {
    static std::string convert(const invsq::Poly& p) { return p.to_string(); }
};
template <>
struct StringMaker<invsq::DiffOp> {
    static std::string convert(const invsq::DiffOp& d) { return d.to_string(); }
};
}  // namespace Catch

#endif  // INVSQ_TEST_RANDOM_HPP
