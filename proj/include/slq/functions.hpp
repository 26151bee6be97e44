#pragma once

#include <cmath>
#include <string>
#include <string_view>

#include "slq/core.hpp"

namespace slq {

enum class FunctionKind { exp_neg, sqrt, log, tanh_sqrt };

inline std::string_view to_string(FunctionKind k) {
  switch (k) {
    case FunctionKind::exp_neg: return "exp_neg";
    case FunctionKind::sqrt: return "sqrt";
    case FunctionKind::log: return "log";
    case FunctionKind::tanh_sqrt: return "tanh_sqrt";
  }
  return "?";
}

inline FunctionKind parse_function_kind(std::string_view s) {
  if (s == "exp_neg" || s == "exp") return FunctionKind::exp_neg;
  if (s == "sqrt") return FunctionKind::sqrt;
  if (s == "log") return FunctionKind::log;
  if (s == "tanh_sqrt" || s == "tanhsqrt") return FunctionKind::tanh_sqrt;
  throw UnsupportedParameter("unknown function kind '" + std::string(s) + "'");
}

/// The scalar function f of the given kind. Throws DomainError outside the domain
/// (x < 0 for sqrt and tanh_sqrt, x <= 0 for log).
class ScalarFunction {
public:
  explicit ScalarFunction(FunctionKind kind) : kind_(kind) {}
  FunctionKind kind() const noexcept { return kind_; }

  double operator()(double x) const {
    switch (kind_) {
      case FunctionKind::exp_neg:
        return std::exp(-x);
      case FunctionKind::sqrt:
        if (!(x >= 0.0)) throw DomainError("sqrt evaluated at negative argument", x);
        return std::sqrt(x);
      case FunctionKind::log:
        if (!(x > 0.0)) throw DomainError("log evaluated at nonpositive argument", x);
        return std::log(x);
      case FunctionKind::tanh_sqrt:
        if (!(x >= 0.0)) throw DomainError("tanh_sqrt evaluated at negative argument", x);
        return std::tanh(std::sqrt(x));
    }
    return 0.0;
  }

private:
  FunctionKind kind_;
};

}  // namespace slq
