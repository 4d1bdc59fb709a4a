// SPDX-License-Identifier: Apache-2.0
//
// Array steering vectors for uniform linear and uniform rectangular arrays.

#pragma once

#include "hbfsim/common.hpp"

namespace hbf {

/// Element layout of one sector panel: `horizontal` columns by `vertical`
/// rows, element index = h * vertical + v.
struct PanelShape {
  int horizontal = 1;
  int vertical = 1;

  int elements() const { return horizontal * vertical; }
  friend bool operator==(const PanelShape&, const PanelShape&) = default;
};

/// Most-square factorization of `n`, wider than tall for non-squares.
inline PanelShape panel_shape(int n) {
  if (n < 1) throw ContractViolation("panel element count must be positive");
  int vertical = static_cast<int>(std::sqrt(static_cast<double>(n)));
  while (vertical > 1 && n % vertical != 0) --vertical;
  return {n / vertical, vertical};
}

/// Unit-norm ULA response; entry m is exp(j m 2 pi (d/lambda) sin(phi)) / sqrt(n).
inline CVector ula_steering(int n, double d_over_lambda, double phi_deg) {
  if (n < 1) throw ContractViolation("ula_steering: n must be >= 1");
  const double step = 2.0 * std::numbers::pi * d_over_lambda * std::sin(deg2rad(phi_deg));
  const double norm = 1.0 / std::sqrt(static_cast<double>(n));
  CVector a(n);
  for (int m = 0; m < n; ++m) a(m) = std::polar(norm, m * step);
  return a;
}

/// URA response as the Kronecker product of the horizontal (azimuth) and
/// vertical (elevation) ULA responses.
inline CVector ura_steering(int n_h, int n_v, double d_over_lambda, double phi_deg,
                            double theta_deg) {
  if (n_h < 1 || n_v < 1) throw ContractViolation("ura_steering: dimensions must be >= 1");
  const CVector ah = ula_steering(n_h, d_over_lambda, phi_deg);
  const CVector av = ula_steering(n_v, d_over_lambda, theta_deg);
  CVector a(n_h * n_v);
  for (int h = 0; h < n_h; ++h) a.segment(h * n_v, n_v) = ah(h) * av;
  return a;
}

inline CVector ura_steering(const PanelShape& shape, double d_over_lambda, double phi_deg,
                            double theta_deg) {
  return ura_steering(shape.horizontal, shape.vertical, d_over_lambda, phi_deg, theta_deg);
}

}  // namespace hbf
