#pragma once

namespace esqpt {

/// <j1 m1; j2 m2 | j m> for integer angular momenta, Condon-Shortley phases.
/// Evaluated from the Racah factorial sum in exact rational arithmetic; the
/// single square root is taken at the end. Returns 0 for forbidden couplings.
double clebsch_gordan(int j1, int m1, int j2, int m2, int j, int m);

/// Exact square of the coefficient as num/den with the sign of the coefficient.
struct SignedRational {
  int sign = 0;
  __int128 num = 0;
  __int128 den = 1;
};
SignedRational clebsch_gordan_squared(int j1, int m1, int j2, int m2, int j, int m);

}  // namespace esqpt
