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

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace spintraj {

using cd = std::complex<double>;
using cx_mat = Eigen::MatrixXcd;
using cx_vec = Eigen::VectorXcd;
using mat = Eigen::MatrixXd;
using vec = Eigen::VectorXd;

// A state in Liouville space: coefficients over a ProductBasis.
using StateVector = cx_vec;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline const cd ci{0.0, 1.0};

// Out-of-range index, rank, projection, unknown isotope, mismatched sizes.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Non-finite intermediates in propagation or optimization.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed documents (system files, waveforms, trajectories, state expressions).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace spintraj
