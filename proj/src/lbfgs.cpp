/* Copyright 2026 The Spintraj Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "spintraj/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>

namespace spintraj {

namespace {

// Internally minimizes F = -objective.
struct Probe {
  double alpha = 0.0;
  double f = 0.0;
  double slope = 0.0;  // dF/dalpha
  vec x;
  vec g;
};

class Minimizer {
 public:
  Minimizer(const Objective &objective, const LbfgsOptions &options) : objective_(objective), opt_(options) {}

  Probe evaluate(const vec &x, double alpha, const vec &direction) {
    Probe p;
    p.alpha = alpha;
    p.x = x;
    vec grad(x.size());
    const double value = objective_(x, grad);
    ++evaluations_;
    p.f = std::isfinite(value) ? -value : std::numeric_limits<double>::infinity();
    p.g = -grad;
    if (!p.g.allFinite()) {
      p.f = std::numeric_limits<double>::infinity();
      p.g.setZero();
    }
    p.slope = direction.size() ? p.g.dot(direction) : 0.0;
    if (!best_ || p.f < best_->f) best_ = p;
    return p;
  }

  // Strong-Wolfe search from `start` along `dir`.
  std::optional<Probe> search(const Probe &start, const vec &dir, double alpha) {
    const double d0 = start.g.dot(dir);
    if (!(d0 < 0.0)) return std::nullopt;
    Probe prev = start;
    prev.alpha = 0.0;
    prev.slope = d0;
    for (int i = 0; i < opt_.max_evaluations_per_search; ++i) {
      Probe cur = evaluate(start.x + alpha * dir, alpha, dir);
      if (cur.f > start.f + opt_.c1 * alpha * d0 || (i > 0 && cur.f >= prev.f))
        return zoom(start, d0, dir, prev, cur, opt_.max_evaluations_per_search - i - 1);
      if (std::abs(cur.slope) <= -opt_.c2 * d0) return cur;
      if (cur.slope >= 0.0) return zoom(start, d0, dir, cur, prev, opt_.max_evaluations_per_search - i - 1);
      prev = cur;
      alpha *= 2.0;
    }
    return std::nullopt;
  }

  std::optional<Probe> zoom(const Probe &start, double d0, const vec &dir, Probe lo, Probe hi, int budget) {
    for (int i = 0; i < budget; ++i) {
      double alpha = interpolate(lo, hi);
      const double lo_a = std::min(lo.alpha, hi.alpha), hi_a = std::max(lo.alpha, hi.alpha);
      const double width = hi_a - lo_a;
      if (width <= 1e-14 * std::max(1.0, hi_a)) return std::nullopt;
      alpha = std::clamp(alpha, lo_a + 0.1 * width, hi_a - 0.1 * width);
      Probe cur = evaluate(start.x + alpha * dir, alpha, dir);
      if (cur.f > start.f + opt_.c1 * alpha * d0 || cur.f >= lo.f) {
        hi = cur;
      } else {
        if (std::abs(cur.slope) <= -opt_.c2 * d0) return cur;
        if (cur.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
        lo = cur;
      }
    }
    return std::nullopt;
  }

  // Minimizer of the cubic through both end points; bisection when undefined.
  static double interpolate(const Probe &a, const Probe &b) {
    const double mid = 0.5 * (a.alpha + b.alpha);
    if (!std::isfinite(a.f) || !std::isfinite(b.f)) return mid;
    const double t1 = a.slope + b.slope - 3.0 * (a.f - b.f) / (a.alpha - b.alpha);
    const double disc = t1 * t1 - a.slope * b.slope;
    if (disc < 0.0) return mid;
    const double t2 = std::copysign(std::sqrt(disc), b.alpha - a.alpha);
    const double denom = b.slope - a.slope + 2.0 * t2;
    if (denom == 0.0) return mid;
    const double alpha = b.alpha - (b.alpha - a.alpha) * (b.slope + t2 - t1) / denom;
    return std::isfinite(alpha) ? alpha : mid;
  }

  int evaluations() const { return evaluations_; }
  const std::optional<Probe> &best() const { return best_; }

 private:
  const Objective &objective_;
  const LbfgsOptions &opt_;
  int evaluations_ = 0;
  std::optional<Probe> best_;
};

vec two_loop(const vec &g, const std::deque<vec> &s, const std::deque<vec> &y, const std::deque<double> &rho) {
  vec q = g;
  std::vector<double> a(s.size());
  for (std::size_t i = s.size(); i-- > 0;) {
    a[i] = rho[i] * s[i].dot(q);
    q -= a[i] * y[i];
  }
  if (!s.empty()) q *= s.back().dot(y.back()) / y.back().squaredNorm();
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double b = rho[i] * y[i].dot(q);
    q += (a[i] - b) * s[i];
  }
  return -q;
}

}  // namespace

LbfgsResult maximize(const Objective &objective, vec x0, const LbfgsOptions &options) {
  Minimizer mini(objective, options);
  LbfgsResult result;
  Probe cur = mini.evaluate(x0, 0.0, vec());
  if (!std::isfinite(cur.f)) throw NumericError("objective is not finite at the starting point");

  std::deque<vec> s_hist, y_hist;
  std::deque<double> rho_hist;
  result.value_history.push_back(-cur.f);
  result.gradient_norm_history.push_back(cur.g.lpNorm<Eigen::Infinity>());

  auto finish = [&](LbfgsStatus status) {
    result.status = status;
    result.x = cur.x;
    result.value = -cur.f;
    result.evaluations = mini.evaluations();
    return result;
  };

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    const double gnorm = cur.g.lpNorm<Eigen::Infinity>();
    if (gnorm < options.gradient_tolerance) return finish(LbfgsStatus::converged);

    std::optional<Probe> next;
    if (!s_hist.empty()) next = mini.search(cur, two_loop(cur.g, s_hist, y_hist, rho_hist), 1.0);
    if (!next) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      const vec dir = -cur.g;
      next = mini.search(cur, dir, std::min(1.0, 1.0 / gnorm));
    }
    if (!next) {
      if (mini.best() && mini.best()->f < cur.f) cur = *mini.best();
      result.iterations = iter;
      return finish(LbfgsStatus::line_search_failed);
    }

    vec s = next->x - cur.x;
    vec y = next->g - cur.g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > options.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    cur = std::move(*next);
    result.iterations = iter + 1;
    result.value_history.push_back(-cur.f);
    result.gradient_norm_history.push_back(cur.g.lpNorm<Eigen::Infinity>());
  }
  return finish(cur.g.lpNorm<Eigen::Infinity>() < options.gradient_tolerance ? LbfgsStatus::converged
                                                                             : LbfgsStatus::iteration_limit);
}

}  // namespace spintraj
