#include "fitting.hpp"

#include <algorithm>
#include <cmath>

#include "smcf/errors.hpp"

namespace smcf::cli {

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw ConstructionError("line fit needs two equal-length samples");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx <= 0.0) throw ConstructionError("line fit needs varying x values");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (syy <= 0.0) {
    f.r2 = 1.0;  // constant y is fit exactly by the horizontal line
  } else {
    f.r2 = 1.0 - (syy - f.slope * sxy) / syy;
  }
  return f;
}

double sample_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw ConstructionError("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw ConstructionError("quantile outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= values.size()) return values.back();
  const double w = h - static_cast<double>(lo);
  return values[lo] * (1.0 - w) + values[lo + 1] * w;
}

double sample_mean(std::span<const double> values) {
  if (values.empty()) throw ConstructionError("mean of an empty sample");
  double m = 0.0;
  for (double v : values) m += v;
  return m / static_cast<double>(values.size());
}

double sample_sd(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = sample_mean(values);
  double acc = 0.0;
  for (double v : values) acc += (v - m) * (v - m);
  return std::sqrt(acc / static_cast<double>(values.size() - 1));
}

double bootstrap_quantile_se(std::span<const double> values, double q, int b,
                             RandomStream& rng) {
  if (values.empty()) throw ConstructionError("bootstrap of an empty sample");
  if (b < 2) throw ConstructionError("need at least two resamples");
  std::vector<double> stats(static_cast<std::size_t>(b));
  std::vector<double> resample(values.size());
  for (int r = 0; r < b; ++r) {
    for (double& v : resample)
      v = values[rng.uniform_index(values.size())];
    stats[static_cast<std::size_t>(r)] = sample_quantile(resample, q);
  }
  return sample_sd(stats);
}

}  // namespace smcf::cli
