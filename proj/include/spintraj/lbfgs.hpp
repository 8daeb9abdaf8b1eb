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

#pragma once

#include <functional>
#include <vector>

#include "spintraj/core.hpp"

namespace spintraj {

// Objective returning the value at x and writing the gradient into the second argument.
using Objective = std::function<double(const vec &, vec &)>;

struct LbfgsOptions {
  int memory = 10;
  int max_iterations = 1000;
  double gradient_tolerance = 1e-6;  // infinity norm
  double c1 = 1e-4;                  // sufficient increase
  double c2 = 0.9;                   // curvature
  int max_evaluations_per_search = 40;
};

enum class LbfgsStatus { converged, iteration_limit, line_search_failed };

struct LbfgsResult {
  vec x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  LbfgsStatus status = LbfgsStatus::iteration_limit;
  std::vector<double> value_history;          // accepted points, including the start
  std::vector<double> gradient_norm_history;  // infinity norms at accepted points
};

/// Limited-memory BFGS ascent with a bracketing line search enforcing the strong
/// Wolfe conditions. A failed search clears the curvature memory and retries
/// along the gradient once before giving up; the best point seen is returned.
LbfgsResult maximize(const Objective &objective, vec x0, const LbfgsOptions &options = {});

}  // namespace spintraj
