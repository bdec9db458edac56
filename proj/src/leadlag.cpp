#include "socialwell/leadlag.hpp"

#include <algorithm>
#include <exception>
#include <optional>
#include <thread>

namespace socialwell::leadlag {

double hy_covariance(const AsyncSeries& x, const AsyncSeries& y) {
  return hy_covariance(x.times(), x.values(), y.times(), y.values());
}

Correlation hy_correlation(const AsyncSeries& x, const AsyncSeries& y) {
  const double cov = hy_covariance(x, y);
  const double vx = realized_variance(x.values());
  const double vy = realized_variance(y.values());
  if (vx <= 0 || vy <= 0) throw std::invalid_argument("leadlag: zero realized variance");
  Correlation out;
  out.value = cov / std::sqrt(vx * vy);
  out.out_of_range = std::abs(out.value) > 1.0;
  return out;
}

AsyncSeries shift(const AsyncSeries& y, double theta) {
  return y.with_times((y.times().array() - theta).matrix());
}

LagGrid::LagGrid(double delta, double step) : delta_(delta), step_(step) {
  if (!(delta > 0) || !(step > 0) || !std::isfinite(delta) || !std::isfinite(step))
    throw std::invalid_argument("leadlag: delta and step must be positive");
  if (step > delta) throw std::invalid_argument("leadlag: step must not exceed delta");
  const auto k = static_cast<long>(std::floor(delta / step * (1 + 1e-12)));
  for (long i = -k; i <= k; ++i) offsets_.push_back(static_cast<double>(i) * step);
}

LeadLagResult estimate_lead_lag(const AsyncSeries& x, const AsyncSeries& y, const LagGrid& grid, unsigned jobs) {
  const auto& offsets = grid.offsets();
  std::vector<std::optional<double>> contrast(offsets.size());
  auto evaluate = [&](std::size_t k) {
    try {
      contrast[k] = hy_covariance(x, shift(y, offsets[k]));
    } catch (const std::invalid_argument&) {
      contrast[k].reset();  // no overlap at this offset
    }
  };
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(offsets.size())));
  if (jobs == 1) {
    for (std::size_t k = 0; k < offsets.size(); ++k) evaluate(k);
  } else {
    std::vector<std::thread> workers;
    for (unsigned t = 0; t < jobs; ++t)
      workers.emplace_back([&, t] {
        for (std::size_t k = t; k < offsets.size(); k += jobs) evaluate(k);
      });
    for (auto& w : workers) w.join();
  }

  LeadLagResult out;
  double best = 0;
  for (std::size_t k = 0; k < offsets.size(); ++k) {
    if (!contrast[k]) {
      out.excluded.push_back(offsets[k]);
      continue;
    }
    out.profile.push_back({offsets[k], *contrast[k]});
    best = std::max(best, std::abs(*contrast[k]));
  }
  if (out.profile.empty()) throw std::runtime_error("leadlag: every grid offset was excluded (no interval overlap)");
  if (best == 0) throw std::runtime_error("leadlag: no covariation detected");

  for (const auto& p : out.profile)
    if (std::abs(p.contrast) >= best * (1 - kTieTolerance)) out.ties.push_back(p.theta);
  out.theta_hat = *std::min_element(out.ties.begin(), out.ties.end(), [](double a, double b) {
    if (std::abs(a) != std::abs(b)) return std::abs(a) < std::abs(b);
    return a < b;
  });
  out.correlation = hy_correlation(x, shift(y, out.theta_hat));
  return out;
}

double previous_tick_correlation(const AsyncSeries& x, const AsyncSeries& y, double step) {
  if (!(step > 0)) throw std::invalid_argument("leadlag: step must be positive");
  const double start = std::max(x.times()[0], y.times()[0]);
  const double end = std::min(x.times()[x.size() - 1], y.times()[y.size() - 1]);
  if (!(end > start)) throw std::invalid_argument("leadlag: series windows do not overlap");

  auto sample = [](const AsyncSeries& s, double t, Eigen::Index& cursor) {
    while (cursor + 1 < s.size() && s.times()[cursor + 1] <= t) ++cursor;
    return s.values()[cursor];
  };
  Eigen::Index cx = 0, cy = 0;
  double px = sample(x, start, cx), py = sample(y, start, cy);
  double sxy = 0, sxx = 0, syy = 0;
  const auto n = static_cast<long>(std::floor((end - start) / step));
  for (long k = 1; k <= n; ++k) {
    const double t = start + static_cast<double>(k) * step;
    const double vx = sample(x, t, cx), vy = sample(y, t, cy);
    const double dx = vx - px, dy = vy - py;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
    px = vx;
    py = vy;
  }
  if (sxx <= 0 || syy <= 0) throw std::invalid_argument("leadlag: zero realized variance after synchronization");
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace socialwell::leadlag
