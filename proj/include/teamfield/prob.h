// Copyright 2026 The Teamfield Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TEAMFIELD_PROB_H_
#define TEAMFIELD_PROB_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace teamfield {

// Tolerance used for every simplex normalization check.
inline constexpr double kSimplexTolerance = 1e-12;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when an exhaustive computation would exceed its enumeration budget.
class BudgetError : public Error {
 public:
  using Error::Error;
};

// A probability vector on a finite space. Construction validates
// nonnegativity and normalization within kSimplexTolerance.
class ProbVec {
 public:
  ProbVec() = default;
  explicit ProbVec(std::vector<double> weights);

  // Rescales nonnegative weights to sum to one. Throws on a zero sum.
  static ProbVec Normalized(std::vector<double> weights);
  static ProbVec Delta(int size, int index);
  static ProbVec Uniform(int size);

  int size() const { return static_cast<int>(weights_.size()); }
  double operator[](int i) const { return weights_[i]; }
  std::span<const double> weights() const { return weights_; }
  const std::vector<double>& vec() const { return weights_; }

  bool operator==(const ProbVec&) const = default;

 private:
  std::vector<double> weights_;
};

// Returns a description of why `weights` is not a probability vector, or an
// empty string when it is one.
std::string SimplexViolation(std::span<const double> weights,
                             double tol = kSimplexTolerance);

// Total variation distance, 0.5 * sum |p - q|.
double TotalVariation(std::span<const double> p, std::span<const double> q);

// Row-stochastic matrix: one probability vector over `cols` targets for each
// of `rows` sources. Stored row-major.
class Kernel {
 public:
  Kernel() = default;
  Kernel(int rows, int cols, std::vector<double> data);
  explicit Kernel(const std::vector<std::vector<double>>& rows);

  static Kernel Deterministic(int cols, const std::vector<int>& targets);
  static Kernel Uniform(int rows, int cols);
  // Skips the stochasticity checks; used to hold specs awaiting validation.
  static Kernel Unchecked(int rows, int cols, std::vector<double> data);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double operator()(int r, int c) const { return data_[r * cols_ + c]; }
  std::span<const double> Row(int r) const {
    return std::span<const double>(data_).subspan(r * cols_, cols_);
  }
  const std::vector<double>& data() const { return data_; }
  std::vector<std::vector<double>> ToRows() const;

  // Maximum over rows of the row-wise total variation distance.
  double MaxRowTv(const Kernel& other) const;

  bool operator==(const Kernel&) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// Convex combination (1 - alpha) * a + alpha * b, rowwise.
Kernel Blend(const Kernel& a, const Kernel& b, double alpha);

// Empirical measure (1/N) sum_k delta_{actions[k]} over a space of `size`.
ProbVec EmpMeasure(std::span<const int> actions, int size);

// Empirical measure from a count vector.
ProbVec EmpFromCounts(std::span<const int> counts);

// Compensated summation accumulator.
class KahanSum {
 public:
  void Add(double x) {
    const double y = x - carry_;
    const double t = sum_ + y;
    carry_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

// Inverse-CDF draw: accumulates `weights` in input order and returns the
// first index whose cumulative weight exceeds `u` in [0, 1). Falls back to
// the last index with positive weight to absorb round-off.
int SampleIndex(std::span<const double> weights, double u);

// Number of points on the simplex grid of step 1/steps in `dim` dimensions.
std::int64_t SimplexGridSize(int dim, int steps);

// All probability vectors with entries in {0, 1/steps, ..., 1}, in
// lexicographic order of the entries (descending mass on index 0 first).
std::vector<std::vector<double>> SimplexGrid(int dim, int steps);

// Grid step count for a resolution, e.g. 1e-3 -> 1000. Throws unless
// 1/resolution is (numerically) an integer.
int StepsForResolution(double resolution);

}  // namespace teamfield

#endif  // TEAMFIELD_PROB_H_
