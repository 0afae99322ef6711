#include "simlab/exact_bins.hpp"

#include <cmath>

#include "simlab/errors.hpp"

namespace simlab {

rational to_rational(double x) {
  if (!std::isfinite(x)) throw validation_error("to_rational: non-finite value");
  return rational(x);
}

bigint ceil_rational(const rational& q) {
  bigint num = boost::multiprecision::numerator(q);
  bigint den = boost::multiprecision::denominator(q);  // positive by invariant
  bigint quot = num / den;
  if (num > 0 && quot * den != num) quot += 1;
  return quot;
}

bigint ceil_bin(const rational& g, double eps, double zeta) {
  if (!(eps > 0.0)) throw config_error("ceil_bin: eps must be positive");
  return ceil_rational(g / to_rational(eps) + to_rational(zeta));
}

bigint ceil_bin(double g, double eps, double zeta) {
  return ceil_bin(to_rational(g), eps, zeta);
}

int argmax_bin(const std::vector<bigint>& bins) {
  if (bins.empty()) throw validation_error("argmax_bin: empty input");
  int best = 0;
  for (std::size_t i = 1; i < bins.size(); ++i)
    if (bins[i] > bins[best]) best = static_cast<int>(i);
  return best;
}

}  // namespace simlab
