#include "lodens/rates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lodens {

double beta_bar(std::span<const double> beta)
{
  if (beta.empty())
    throw std::invalid_argument("smoothness vector is empty");
  double s = 0.0;
  for (double b : beta) {
    if (!(b > 0.0))
      throw std::invalid_argument("smoothness components must be positive");
    s += 1.0 / b;
  }
  return 1.0 / s;
}

double rate_psi(double x, std::span<const double> beta, double n)
{
  if (x < 0.0)
    throw std::invalid_argument("rate argument must be nonnegative");
  const double bb = beta_bar(beta);
  return std::min(x, std::pow(x / n, bb / (2.0 * bb + 1.0)));
}

double rate_psi_tilde(double x, std::span<const double> beta, double n)
{
  if (x < 0.0)
    throw std::invalid_argument("rate argument must be nonnegative");
  const double bb = beta_bar(beta);
  const double a = std::max(breakpoint(beta, n),
                            std::pow(x / n, bb / (2.0 * bb + 1.0)));
  return a * std::pow(std::log(n), 1.5);
}

double breakpoint(std::span<const double> beta, double n)
{
  const double bb = beta_bar(beta);
  return std::pow(n, -bb / (bb + 1.0));
}

double support_rate(double beta, double gamma, int d, double n)
{
  if (!(beta > 0.0 && gamma > 0.0 && d > 0))
    throw std::invalid_argument("support rate needs beta, gamma, d > 0");
  return std::pow(n, -gamma * beta / (beta + d));
}

double rate_vartheta(double x, std::span<const double> beta, double n,
                     double zeta2)
{
  return std::max(rate_psi(x, beta, n), std::pow(n, -zeta2));
}

} // namespace lodens
