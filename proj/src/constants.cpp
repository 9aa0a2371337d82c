#include "afflat/constants.hpp"

#include <cmath>
#include <numbers>

#include "afflat/errors.hpp"

namespace afflat {

// V_k = V_{k-2} 2 pi / k from V_0 = 1, V_1 = 2; exact in the low dimensions.
double ball_volume(int k) {
  if (k < 0) throw UsageError("ball_volume: dimension must be >= 0");
  double v = k % 2 ? 2.0 : 1.0;
  for (int j = 2 + k % 2; j <= k; j += 2) v *= 2.0 * std::numbers::pi / j;
  return v;
}

double sphere_volume(int d) {
  if (d < 1) throw UsageError("sphere_volume: dimension must be >= 1");
  return d * ball_volume(d);
}

double poisson_pair_reference(double s, int d) {
  return ball_volume(d - 1) * std::pow(s, d - 1);
}

Constants Constants::for_dimension(int d) {
  if (d < 2) throw UsageError("Constants: dimension must be >= 2");
  Constants k;
  k.d = d;
  k.cd_norm = std::pow(sphere_volume(d), -1.0 / (d - 1));
  k.cd_siegel = d * std::pow(2.0 / std::sqrt(3.0), d);
  k.delta_d = d * std::pow(4.0, d);
  k.C_d = 2.0 * (k.cd_siegel + 1.0);
  return k;
}

}  // namespace afflat
