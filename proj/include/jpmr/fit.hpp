#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace jpmr {

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double intercept_se = 0.0;
};

/// Ordinary least squares y = intercept + slope * x. Needs min_points points
/// and a non-degenerate x spread.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y,
                     std::size_t min_points = 2);

/// y ~ offset + amplitude * shape(theta, x) with theta found by a log-spaced
/// grid search followed by golden-section refinement; offset and amplitude
/// are solved by linear least squares at each theta.
struct SeparableFit {
  double theta = 0.0;
  double amplitude = 0.0;
  double offset = 0.0;
  double rss = 0.0;
};
SeparableFit separable_fit(const std::vector<double>& x, const std::vector<double>& y,
                           const std::function<double(double theta, double x)>& shape,
                           double theta_lo, double theta_hi, int grid = 400,
                           bool fit_offset = true);

/// y = offset - amplitude * exp(-x / tau); theta is tau.
SeparableFit fit_exponential_recovery(const std::vector<double>& x, const std::vector<double>& y,
                                      double tau_lo, double tau_hi);
/// y = offset + amplitude * exp(-(x / T)^2); theta is T.
SeparableFit fit_gaussian_decay(const std::vector<double>& x, const std::vector<double>& y,
                                double t_lo, double t_hi);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // maximum-likelihood (divide by n)
};
MeanStd gaussian_mle(const std::vector<double>& v);

struct Peak2D {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
  double prominence = 0.0;
};
/// Local maxima of a row-major grid (4-neighbour connectivity) ranked by
/// topographic prominence; only peaks with prominence >= min_prominence are
/// returned, highest first. The global maximum's prominence is its height
/// above the grid minimum.
std::vector<Peak2D> find_peaks_2d(const std::vector<double>& grid, std::size_t rows,
                                  std::size_t cols, double min_prominence);

}  // namespace jpmr
