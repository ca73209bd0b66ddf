#include "nfp/shaping.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nfp {

ShapingKind shaping_kind_from_string(const std::string& s) {
  if (s == "exp") return ShapingKind::Exp;
  if (s == "tanh") return ShapingKind::Tanh;
  if (s == "power") return ShapingKind::Power;
  if (s == "atan") return ShapingKind::Atan;
  throw std::invalid_argument("unknown shaping function: " + s);
}

std::string to_string(ShapingKind k) {
  switch (k) {
    case ShapingKind::Exp: return "exp";
    case ShapingKind::Tanh: return "tanh";
    case ShapingKind::Power: return "power";
    case ShapingKind::Atan: return "atan";
  }
  return "?";
}

ShapingFunction::ShapingFunction(ShapingKind kind, double power_n)
    : kind_(kind), power_n_(power_n) {
  if (kind == ShapingKind::Power && power_n < 1.0)
    throw std::invalid_argument("power shaping needs n >= 1");
}

double ShapingFunction::f(double beta) const {
  switch (kind_) {
    case ShapingKind::Exp: return std::exp(beta);
    case ShapingKind::Tanh: return 1.0 - std::tanh(beta);
    case ShapingKind::Power: return std::pow(beta, -power_n_);
    case ShapingKind::Atan:
      return 1.0 - std::atan(beta) / (std::numbers::pi / 2.0);
  }
  return 0.0;
}

double ShapingFunction::t2(double beta) const {
  switch (kind_) {
    case ShapingKind::Exp: return 1.0;
    case ShapingKind::Tanh: return -(1.0 + std::tanh(beta));
    case ShapingKind::Power: return -power_n_ / beta;
    case ShapingKind::Atan:
      return -1.0 / ((std::numbers::pi / 2.0 - std::atan(beta)) *
                     (1.0 + beta * beta));
  }
  return 0.0;
}

bool ShapingFunction::in_domain(double beta) const {
  switch (kind_) {
    case ShapingKind::Exp: return beta <= 0.0;
    case ShapingKind::Tanh: return beta >= 0.0;
    case ShapingKind::Power: return beta >= 1.0;
    case ShapingKind::Atan: return beta >= 0.0;
  }
  return false;
}

double ShapingFunction::lower_bound(int d_n) const {
  switch (kind_) {
    case ShapingKind::Exp: return -10.0 * d_n;
    case ShapingKind::Tanh: return 0.0;
    case ShapingKind::Power: return 1.0;
    case ShapingKind::Atan: return 0.0;
  }
  return 0.0;
}

double ShapingFunction::upper_bound(int /*d_n*/) const {
  switch (kind_) {
    case ShapingKind::Exp: return 0.0;
    case ShapingKind::Tanh: return 10.0;
    case ShapingKind::Power: return 1e6;
    case ShapingKind::Atan: return 1e6;
  }
  return 0.0;
}

double ShapingFunction::beta_for_density(double rho) const {
  if (rho < 0.0 || rho >= 1.0)
    throw std::domain_error("beta_for_density needs rho in [0, 1)");
  switch (kind_) {
    case ShapingKind::Exp: return std::log(1.0 - rho);
    case ShapingKind::Tanh: return std::atanh(rho);
    case ShapingKind::Power: return std::pow(1.0 - rho, -1.0 / power_n_);
    case ShapingKind::Atan:
      return std::tan(rho * std::numbers::pi / 2.0);
  }
  return 0.0;
}

}  // namespace nfp
