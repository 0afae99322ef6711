#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <vector>

namespace simlab {

// Exact rational arithmetic over doubles. A finite double is an exact
// rational, so quantities like ceil(g / eps + zeta) can be computed without
// any rounding once the inputs are fixed. All rounding-bin comparisons in the
// codebase go through these helpers so that bin identities never depend on
// floating-point summation order.
using rational = boost::multiprecision::cpp_rational;
using bigint = boost::multiprecision::cpp_int;

rational to_rational(double x);  // throws on non-finite input

bigint ceil_rational(const rational& q);

// ceil(g / eps + zeta) computed exactly; eps must be positive.
bigint ceil_bin(const rational& g, double eps, double zeta);
bigint ceil_bin(double g, double eps, double zeta);

// Smallest index attaining the largest bin.
int argmax_bin(const std::vector<bigint>& bins);

}  // namespace simlab
