#pragma once

#include <span>

namespace lodens {

//! (sum_i 1/beta_i)^{-1}
double beta_bar(std::span<const double> beta);

//! x ^ (x/n)^{bb/(2bb+1)}
double rate_psi(double x, std::span<const double> beta, double n);
//! [n^{-bb/(bb+1)} v (x/n)^{bb/(2bb+1)}] (ln n)^{3/2}
double rate_psi_tilde(double x, std::span<const double> beta, double n);
//! n^{-bb/(bb+1)}, boundary between the two regimes
double breakpoint(std::span<const double> beta, double n);
//! n^{-gamma beta / (beta + d)}
double support_rate(double beta, double gamma, int d, double n);
//! psi v n^{-zeta2}
double rate_vartheta(double x, std::span<const double> beta, double n,
                     double zeta2);

} // namespace lodens
