#pragma once

#include <cstddef>
#include <string>

#include "mvbismut/measure.hpp"

namespace mvb {

/// Terminal functional f: R^d -> R with a label for reports.
struct Observable {
  ScalarField fn;
  std::string label;
};

/// f(x) = (1/d) sum_k x_k.
Observable coordinate_mean_observable(std::size_t dim);
/// f(x) = 1 / (1 + exp(-(x_axis - center) / scale)).
Observable sigmoid_observable(std::size_t axis, double center, double scale);
/// f(x) = Phi((x_axis - threshold) / width), a smoothed indicator of {x_axis > threshold}.
Observable smoothed_indicator_observable(std::size_t axis, double threshold, double width);
Observable constant_observable(double value);

/// phi(x)_k = amplitude * sin(frequency * x_k + phase).
Perturbation sine_field(std::size_t dim, double amplitude, double frequency, double phase);
/// phi(x) = scale * x.
Perturbation linear_field(std::size_t dim, double scale);

}  // namespace mvb
