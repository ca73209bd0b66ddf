#pragma once

#include <string>

namespace nfp {

enum class ShapingKind { Exp, Tanh, Power, Atan };

ShapingKind shaping_kind_from_string(const std::string& s);
std::string to_string(ShapingKind k);

// Monotone map f(beta) into (0, 1]. T2 is the logarithmic derivative
// f'(beta)/f(beta), the factor the density gradients carry.
class ShapingFunction {
 public:
  explicit ShapingFunction(ShapingKind kind, double power_n = 12.0);

  ShapingKind kind() const { return kind_; }
  double power_n() const { return power_n_; }

  double f(double beta) const;
  double t2(double beta) const;
  bool in_domain(double beta) const;

  // Default optimizer bounds. The exp map's lower bound widens with the
  // neighborhood size d_n (number of elements in N_i) so a single element
  // can still drive its neighborhood density arbitrarily close to 1.
  double lower_bound(int d_n) const;
  double upper_bound(int d_n) const;

  // beta with 1 - f(beta) == rho, used for uniform initial designs.
  double beta_for_density(double rho) const;

 private:
  ShapingKind kind_;
  double power_n_;
};

}  // namespace nfp
