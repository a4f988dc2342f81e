#pragma once

// Analytic round-wire internal impedance, used only as a test oracle.
// Z' = k/(2 pi r sigma) * J0(k r)/J1(k r),  k = sqrt(-j w mu sigma).

#include <complex>
#include <numbers>

namespace oracle {

using cplx = std::complex<double>;

// power series, fine for |z| up to ~20
inline cplx bessel_j(int n, cplx z) {
  cplx term = 1.0;
  for (int k = 1; k <= n; ++k) term *= z / (2.0 * k);
  cplx sum = term;
  const cplx q = -(z * z) / 4.0;
  for (int m = 1; m < 200; ++m) {
    term *= q / (static_cast<double>(m) * static_cast<double>(m + n));
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

inline cplx wire_impedance(double radius, double sigma, double mu, double omega) {
  if (omega == 0.0) return 1.0 / (sigma * std::numbers::pi * radius * radius);
  const cplx k = std::sqrt(cplx(0.0, -omega * mu * sigma));
  return k / (2.0 * std::numbers::pi * radius * sigma) * bessel_j(0, k * radius) /
         bessel_j(1, k * radius);
}

inline double wire_resistance(double radius, double sigma, double mu, double omega) {
  return wire_impedance(radius, sigma, mu, omega).real();
}

}  // namespace oracle
