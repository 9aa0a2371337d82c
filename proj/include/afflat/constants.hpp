#pragma once

namespace afflat {

/// Surface area of the unit sphere S^{d-1} in R^d, 2 pi^{d/2} / Gamma(d/2).
double sphere_volume(int d);

/// Lebesgue volume of the unit ball in R^k.
double ball_volume(int k);

/// Pair correlation of a unit-intensity Poisson process on R^{d-1}:
/// the volume of the (d-1)-ball of radius s.
double poisson_pair_reference(double s, int d);

/// Dimension-dependent constants. Two distinct quantities share the
/// symbol c_d in the literature; they are kept apart here.
struct Constants {
  int d = 0;
  double cd_norm = 0;    ///< V_{S^{d-1}}^{-1/(d-1)}, pair-correlation scaling.
  double cd_siegel = 0;  ///< d (2/sqrt 3)^d, Siegel-set box constant.
  double delta_d = 0;    ///< d 4^d, floor for the radius r of a region.
  double C_d = 0;        ///< 2 (cd_siegel + 1).

  static Constants for_dimension(int d);
};

}  // namespace afflat
