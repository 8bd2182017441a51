#pragma once

#include <span>
#include <vector>

#include "smcf/rng.hpp"

namespace smcf::cli {

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r2 = 0.0;
};

// Ordinary least squares y = intercept + slope * x.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

// Linear-interpolation quantile of an unsorted sample, q in [0, 1].
double sample_quantile(std::vector<double> values, double q);

double sample_mean(std::span<const double> values);
double sample_sd(std::span<const double> values);

// Bootstrap standard error of a quantile (B resamples).
double bootstrap_quantile_se(std::span<const double> values, double q, int b,
                             RandomStream& rng);

}  // namespace smcf::cli
