#include "mvbismut/observables.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "mvbismut/errors.hpp"

namespace mvb {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

Observable coordinate_mean_observable(std::size_t dim) {
  if (dim == 0) throw ArgumentError("observable: dimension must be positive");
  return {[dim](ConstVec x) {
            double s = 0.0;
            for (std::size_t k = 0; k < dim; ++k) s += x[k];
            return s / static_cast<double>(dim);
          },
          "coordinate_mean"};
}

Observable sigmoid_observable(std::size_t axis, double center, double scale) {
  if (!(scale > 0.0)) throw ArgumentError("observable: sigmoid scale must be positive");
  return {[=](ConstVec x) { return 1.0 / (1.0 + std::exp(-(x[axis] - center) / scale)); },
          "sigmoid(x" + std::to_string(axis) + ";" + fmt(center) + "," + fmt(scale) + ")"};
}

Observable smoothed_indicator_observable(std::size_t axis, double threshold, double width) {
  if (!(width > 0.0)) throw ArgumentError("observable: indicator width must be positive");
  return {[=](ConstVec x) {
            return 0.5 * std::erfc(-(x[axis] - threshold) / (width * std::numbers::sqrt2));
          },
          "indicator(x" + std::to_string(axis) + ">" + fmt(threshold) + ";" + fmt(width) + ")"};
}

Observable constant_observable(double value) {
  return {[value](ConstVec) { return value; }, "const(" + fmt(value) + ")"};
}

Perturbation sine_field(std::size_t dim, double amplitude, double frequency, double phase) {
  return {[=](ConstVec x, MutVec out) {
            for (std::size_t k = 0; k < dim; ++k)
              out[k] = amplitude * std::sin(frequency * x[k] + phase);
          },
          "sin(" + fmt(amplitude) + "," + fmt(frequency) + "," + fmt(phase) + ")"};
}

Perturbation linear_field(std::size_t dim, double scale) {
  return {[=](ConstVec x, MutVec out) {
            for (std::size_t k = 0; k < dim; ++k) out[k] = scale * x[k];
          },
          "linear(" + fmt(scale) + ")"};
}

}  // namespace mvb
