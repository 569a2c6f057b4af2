#include "jpmr/fit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace jpmr {

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y,
                     std::size_t min_points) {
  if (x.size() != y.size()) throw FitError("x and y differ in length");
  const std::size_t n = x.size();
  if (n < std::max<std::size_t>(min_points, 2)) {
    throw FitError("ill-conditioned fit: " + std::to_string(n) + " points, need " +
                   std::to_string(std::max<std::size_t>(min_points, 2)));
  }
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw FitError("ill-conditioned fit: x values coincide");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (n > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - f.intercept - f.slope * x[i];
      rss += r * r;
    }
    const double s2 = rss / (n - 2);
    f.slope_se = std::sqrt(s2 / sxx);
    f.intercept_se = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
  }
  return f;
}

namespace {

SeparableFit solve_linear(const std::vector<double>& x, const std::vector<double>& y,
                          const std::function<double(double, double)>& shape, double theta,
                          bool fit_offset) {
  const std::size_t n = x.size();
  double s1 = 0.0, sf = 0.0, sff = 0.0, sy = 0.0, sfy = 0.0;
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) {
    f[i] = shape(theta, x[i]);
    s1 += 1.0;
    sf += f[i];
    sff += f[i] * f[i];
    sy += y[i];
    sfy += f[i] * y[i];
  }
  SeparableFit r;
  r.theta = theta;
  if (fit_offset) {
    const double det = s1 * sff - sf * sf;
    if (std::abs(det) < 1e-300) {
      r.offset = sy / s1;
      r.amplitude = 0.0;
    } else {
      r.offset = (sff * sy - sf * sfy) / det;
      r.amplitude = (s1 * sfy - sf * sy) / det;
    }
  } else {
    r.amplitude = sff > 0.0 ? sfy / sff : 0.0;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double e = y[i] - r.offset - r.amplitude * f[i];
    r.rss += e * e;
  }
  return r;
}

}  // namespace

SeparableFit separable_fit(const std::vector<double>& x, const std::vector<double>& y,
                           const std::function<double(double, double)>& shape,
                           double theta_lo, double theta_hi, int grid, bool fit_offset) {
  if (x.size() != y.size()) throw FitError("x and y differ in length");
  if (x.size() < (fit_offset ? 3u : 2u)) throw FitError("too few points for separable fit");
  if (!(theta_lo > 0.0 && theta_hi > theta_lo)) throw FitError("bad parameter range");
  const double llo = std::log(theta_lo), lhi = std::log(theta_hi);
  SeparableFit best;
  best.rss = INFINITY;
  int best_i = 0;
  for (int i = 0; i < grid; ++i) {
    const double th = std::exp(llo + (lhi - llo) * i / (grid - 1));
    const auto r = solve_linear(x, y, shape, th, fit_offset);
    if (r.rss < best.rss) {
      best = r;
      best_i = i;
    }
  }
  // Golden-section refinement in log(theta) around the grid minimum.
  double a = llo + (lhi - llo) * std::max(0, best_i - 1) / (grid - 1);
  double b = llo + (lhi - llo) * std::min(grid - 1, best_i + 1) / (grid - 1);
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  auto cost = [&](double lt) { return solve_linear(x, y, shape, std::exp(lt), fit_offset); };
  double c = b - gr * (b - a), d = a + gr * (b - a);
  auto fc = cost(c), fd = cost(d);
  for (int it = 0; it < 100 && b - a > 1e-12; ++it) {
    if (fc.rss < fd.rss) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = cost(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = cost(d);
    }
  }
  const auto refined = fc.rss < fd.rss ? fc : fd;
  return refined.rss <= best.rss ? refined : best;
}

SeparableFit fit_exponential_recovery(const std::vector<double>& x, const std::vector<double>& y,
                                      double tau_lo, double tau_hi) {
  auto r = separable_fit(
      x, y, [](double tau, double t) { return -std::exp(-t / tau); }, tau_lo, tau_hi);
  return r;
}

SeparableFit fit_gaussian_decay(const std::vector<double>& x, const std::vector<double>& y,
                                double t_lo, double t_hi) {
  return separable_fit(
      x, y, [](double T, double t) { return std::exp(-(t / T) * (t / T)); }, t_lo, t_hi);
}

MeanStd gaussian_mle(const std::vector<double>& v) {
  MeanStd m;
  if (v.empty()) return m;
  m.mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double s = 0.0;
  for (double x : v) s += (x - m.mean) * (x - m.mean);
  m.std = std::sqrt(s / v.size());
  return m;
}

std::vector<Peak2D> find_peaks_2d(const std::vector<double>& grid, std::size_t rows,
                                  std::size_t cols, double min_prominence) {
  if (grid.size() != rows * cols) throw FitError("grid size mismatch");
  const std::size_t n = grid.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return grid[a] > grid[b]; });
  std::vector<std::ptrdiff_t> parent(n, -1);
  std::vector<std::size_t> summit(n);  // per root: index of the highest cell
  std::vector<double> prominence(n, -1.0);
  std::vector<bool> is_summit(n, false);
  auto find = [&](std::size_t i) {
    std::size_t r = i;
    while (parent[r] != static_cast<std::ptrdiff_t>(r)) r = parent[r];
    while (parent[i] != static_cast<std::ptrdiff_t>(r)) {
      const std::size_t next = parent[i];
      parent[i] = r;
      i = next;
    }
    return r;
  };
  const double floor_value = n ? grid[order.back()] : 0.0;
  for (std::size_t idx : order) {
    parent[idx] = idx;
    summit[idx] = idx;
    is_summit[idx] = true;
    const std::size_t r = idx / cols, c = idx % cols;
    std::size_t nb[4];
    int k = 0;
    if (r > 0) nb[k++] = idx - cols;
    if (r + 1 < rows) nb[k++] = idx + cols;
    if (c > 0) nb[k++] = idx - 1;
    if (c + 1 < cols) nb[k++] = idx + 1;
    for (int j = 0; j < k; ++j) {
      if (parent[nb[j]] < 0) continue;
      std::size_t ra = find(idx), rb = find(nb[j]);
      if (ra == rb) continue;
      // The lower summit dies at this saddle.
      std::size_t sa = summit[ra], sb = summit[rb];
      const bool a_higher = grid[sa] > grid[sb] || (grid[sa] == grid[sb] && sa < sb);
      const std::size_t high = a_higher ? ra : rb, low = a_higher ? rb : ra;
      const std::size_t dying = summit[low];
      if (dying != idx || grid[dying] > grid[idx]) {
        prominence[dying] = grid[dying] - grid[idx];
      } else {
        prominence[dying] = 0.0;
      }
      parent[low] = high;
    }
  }
  std::vector<Peak2D> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_summit[i]) continue;
    double prom = prominence[i];
    if (prom < 0.0) prom = grid[i] - floor_value;  // global maximum
    // Cells that merged into an existing component as they were added are
    // not summits.
    if (prom <= 0.0) continue;
    if (prom >= min_prominence) out.push_back({i / cols, i % cols, grid[i], prom});
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Peak2D& a, const Peak2D& b) { return a.value > b.value; });
  return out;
}

}  // namespace jpmr
