#pragma once

#include <cmath>
#include <string>
#include <unordered_map>

#include "phrasemt/errors.hpp"
#include "phrasemt/params.hpp"

namespace phrasemt::nn {

// Adam with bias correction.  No gradient clipping anywhere: the configs
// record that choice explicitly (clip_grad stays unset).
template <typename T>
class Adam {
 public:
  Adam(double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void set_lr(double lr) { lr_ = lr; }
  double lr() const { return lr_; }
  long step_count() const { return step_; }

  // One update over every parameter in the store from its .gradient.
  void step(ParamStore<T>& store) {
    ++step_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
    for (std::size_t i = 0; i < store.size(); ++i) {
      Parameter<T>& p = store.at(i);
      Slot& slot = slot_for(p);
      for (long j = 0; j < p.values.numel(); ++j) {
        const double g = static_cast<double>(p.gradient.at(j));
        if (!std::isfinite(g))
          throw TrainError("non-finite gradient in parameter " + p.name + " at step " +
                           std::to_string(step_));
        slot.m[j] = beta1_ * slot.m[j] + (1.0 - beta1_) * g;
        slot.v[j] = beta2_ * slot.v[j] + (1.0 - beta2_) * g * g;
        const double mhat = slot.m[j] / bc1;
        const double vhat = slot.v[j] / bc2;
        const double upd = static_cast<double>(p.values.at(j)) - lr_ * mhat / (std::sqrt(vhat) + eps_);
        if (!std::isfinite(upd))
          throw TrainError("non-finite update for parameter " + p.name + " at step " +
                           std::to_string(step_));
        p.values.at(j) = static_cast<T>(upd);
      }
    }
  }

 private:
  struct Slot {
    std::vector<double> m, v;
  };

  Slot& slot_for(const Parameter<T>& p) {
    auto it = slots_.find(p.name);
    if (it == slots_.end()) {
      Slot s;
      s.m.assign(static_cast<std::size_t>(p.values.numel()), 0.0);
      s.v.assign(static_cast<std::size_t>(p.values.numel()), 0.0);
      it = slots_.emplace(p.name, std::move(s)).first;
    }
    return it->second;
  }

  double lr_, beta1_, beta2_, eps_;
  long step_ = 0;
  std::unordered_map<std::string, Slot> slots_;
};

// Inverse-sqrt schedule: linear warmup to peak_lr, then peak_lr *
// sqrt(warmup/step).
inline double inverse_sqrt_lr(double peak_lr, long warmup_steps, long step) {
  if (step < 1) step = 1;
  if (warmup_steps < 1) warmup_steps = 1;
  if (step < warmup_steps) return peak_lr * static_cast<double>(step) / warmup_steps;
  return peak_lr * std::sqrt(static_cast<double>(warmup_steps) / static_cast<double>(step));
}

}  // namespace phrasemt::nn
