#include "pai/activation.hpp"

#include <cmath>

#include "pai/errors.hpp"

namespace pai {

namespace {

double logistic(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

double Activation::value(double x) const noexcept {
  switch (kind_) {
    case ActivationKind::ReLU:
      return x > 0.0 ? x : 0.0;
    case ActivationKind::Tanh:
      return std::tanh(x);
    case ActivationKind::Sigmoid:
      return logistic(x);
  }
  return 0.0;
}

double Activation::d1(double x) const noexcept {
  switch (kind_) {
    case ActivationKind::ReLU:
      return x > 0.0 ? 1.0 : 0.0;
    case ActivationKind::Tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case ActivationKind::Sigmoid: {
      const double s = logistic(x);
      return s * (1.0 - s);
    }
  }
  return 0.0;
}

double Activation::d2(double x) const noexcept {
  switch (kind_) {
    case ActivationKind::ReLU:
      return 0.0;
    case ActivationKind::Tanh: {
      const double t = std::tanh(x);
      return -2.0 * t * (1.0 - t * t);
    }
    case ActivationKind::Sigmoid: {
      const double s = logistic(x);
      return s * (1.0 - s) * (1.0 - 2.0 * s);
    }
  }
  return 0.0;
}

std::string_view Activation::name() const noexcept {
  switch (kind_) {
    case ActivationKind::ReLU:
      return "relu";
    case ActivationKind::Tanh:
      return "tanh";
    case ActivationKind::Sigmoid:
      return "sigmoid";
  }
  return "?";
}

Activation Activation::parse(std::string_view name) {
  if (name == "relu") return Activation(ActivationKind::ReLU);
  if (name == "tanh") return Activation(ActivationKind::Tanh);
  if (name == "sigmoid") return Activation(ActivationKind::Sigmoid);
  throw ArgumentError("unknown activation '" + std::string(name) + "'");
}

}  // namespace pai
