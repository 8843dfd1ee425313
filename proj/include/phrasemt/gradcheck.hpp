#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "phrasemt/params.hpp"
#include "phrasemt/rng.hpp"

namespace phrasemt::nn {

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::string worst_param;
  long worst_index = -1;
  double analytic = 0.0;
  double numeric = 0.0;
  long entries_checked = 0;
};

// Central-difference gradient check.
//
// loss_fn must be deterministic: two calls with identical parameter values
// return identical losses (fix any rng state inside the closure).  When
// with_grad is true it must also accumulate analytic gradients into the
// parameter store (after a zero_grads()).
//
// The error is measured relative to the overall gradient scale,
//   rel = max_i |fd_i - g_i| / max(||g||_inf, ||fd||_inf, tiny),
// which keeps entries with near-zero gradient from drowning the report in
// finite-difference roundoff.
template <typename T>
GradCheckResult grad_check(ParamStore<T>& store,
                           const std::function<double(bool with_grad)>& loss_fn,
                           double epsilon = 1e-4, long max_entries_per_param = 8,
                           std::uint64_t seed = 0) {
  static_assert(std::is_floating_point_v<T>);
  store.zero_grads();
  loss_fn(true);

  // snapshot analytic gradients
  std::vector<std::vector<double>> analytic(store.size());
  double gmax = 0.0;
  for (std::size_t i = 0; i < store.size(); ++i) {
    const auto& g = store.at(i).gradient;
    analytic[i].resize(static_cast<std::size_t>(g.numel()));
    for (long j = 0; j < g.numel(); ++j) {
      analytic[i][j] = static_cast<double>(g.at(j));
      gmax = std::max(gmax, std::abs(analytic[i][j]));
    }
  }

  RngState rng(seed ^ 0x5eedULL);
  GradCheckResult res;
  double fdmax = 0.0;
  struct Probe {
    std::size_t param;
    long index;
    double fd;
  };
  std::vector<Probe> probes;

  for (std::size_t i = 0; i < store.size(); ++i) {
    Parameter<T>& p = store.at(i);
    const long n = p.values.numel();
    const long count = std::min<long>(n, max_entries_per_param);
    for (long k = 0; k < count; ++k) {
      const long j = count == n ? k : static_cast<long>(rng.below(static_cast<std::uint64_t>(n)));
      const T old = p.values.at(j);
      const double eps = epsilon * std::max(1.0, std::abs(static_cast<double>(old)));
      p.values.at(j) = static_cast<T>(static_cast<double>(old) + eps);
      const double lp = loss_fn(false);
      p.values.at(j) = static_cast<T>(static_cast<double>(old) - eps);
      const double lm = loss_fn(false);
      p.values.at(j) = old;
      const double fd = (lp - lm) / (2.0 * eps);
      fdmax = std::max(fdmax, std::abs(fd));
      probes.push_back({i, j, fd});
      ++res.entries_checked;
    }
  }

  const double scale = std::max({gmax, fdmax, 1e-12});
  for (const auto& pr : probes) {
    const double g = analytic[pr.param][pr.index];
    const double rel = std::abs(pr.fd - g) / scale;
    if (rel > res.max_rel_err) {
      res.max_rel_err = rel;
      res.worst_param = store.at(pr.param).name;
      res.worst_index = pr.index;
      res.analytic = g;
      res.numeric = pr.fd;
    }
  }
  return res;
}

}  // namespace phrasemt::nn
