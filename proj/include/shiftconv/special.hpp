#pragma once

#include <vector>

#include "shiftconv/numeric.hpp"

namespace shiftconv {

// J_n(x) for n in {10, 11, 12}, x >= 0.
double bessel_j(int order, double x);
double bessel_j11(double x);

// Principal branch of log Gamma(z) (cut along the negative real axis).
cplx log_gamma(cplx z);

struct GaussLegendreRule {
  std::vector<double> nodes;    // on [-1, 1], increasing
  std::vector<double> weights;
};

// Cached rule of the given order (1 <= order <= 128).
const GaussLegendreRule& gauss_legendre(int order);

}  // namespace shiftconv
