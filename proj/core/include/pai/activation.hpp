#pragma once

#include <string>
#include <string_view>

namespace pai {

enum class ActivationKind { ReLU, Tanh, Sigmoid };

/// Pointwise nonlinearity with its first two derivatives.
///
/// ReLU uses the conventions relu'(0) = 0 and relu'' = 0 everywhere.
class Activation {
 public:
  constexpr Activation() = default;
  constexpr explicit Activation(ActivationKind kind) : kind_(kind) {}

  double value(double x) const noexcept;
  double d1(double x) const noexcept;
  double d2(double x) const noexcept;

  ActivationKind kind() const noexcept { return kind_; }
  std::string_view name() const noexcept;

  /// Accepts "relu", "tanh", "sigmoid" (case-sensitive). Throws ArgumentError.
  static Activation parse(std::string_view name);

  friend bool operator==(Activation, Activation) = default;

 private:
  ActivationKind kind_ = ActivationKind::Tanh;
};

}  // namespace pai
