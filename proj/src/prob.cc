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

#include "teamfield/prob.h"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace teamfield {

std::string SimplexViolation(std::span<const double> weights, double tol) {
  if (weights.empty()) return "empty probability vector";
  KahanSum total;
  for (size_t i = 0; i < weights.size(); ++i) {
    if (!std::isfinite(weights[i])) {
      return "non-finite weight at index " + std::to_string(i);
    }
    if (weights[i] < 0.0) {
      return "negative weight at index " + std::to_string(i);
    }
    total.Add(weights[i]);
  }
  if (std::abs(total.value() - 1.0) > tol) {
    std::ostringstream out;
    out.precision(17);
    out << "weights sum to " << total.value() << ", not 1";
    return out.str();
  }
  return {};
}

ProbVec::ProbVec(std::vector<double> weights) : weights_(std::move(weights)) {
  if (std::string why = SimplexViolation(weights_); !why.empty()) {
    throw Error("invalid probability vector: " + why);
  }
}

ProbVec ProbVec::Normalized(std::vector<double> weights) {
  KahanSum total;
  for (double w : weights) {
    if (w < 0.0 || !std::isfinite(w)) {
      throw Error("cannot normalize negative or non-finite weights");
    }
    total.Add(w);
  }
  if (total.value() <= 0.0) throw Error("cannot normalize zero weights");
  for (double& w : weights) w /= total.value();
  return ProbVec(std::move(weights));
}

ProbVec ProbVec::Delta(int size, int index) {
  std::vector<double> w(size, 0.0);
  w.at(index) = 1.0;
  return ProbVec(std::move(w));
}

ProbVec ProbVec::Uniform(int size) {
  return ProbVec(std::vector<double>(size, 1.0 / size));
}

double TotalVariation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw Error("total variation: size mismatch");
  double total = 0.0;
  for (size_t i = 0; i < p.size(); ++i) total += std::abs(p[i] - q[i]);
  return 0.5 * total;
}

Kernel::Kernel(int rows, int cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows < 1 || cols < 1) throw Error("kernel must have positive shape");
  if (static_cast<int>(data_.size()) != rows * cols) {
    throw Error("kernel data size does not match shape");
  }
  for (int r = 0; r < rows_; ++r) {
    if (std::string why = SimplexViolation(Row(r)); !why.empty()) {
      throw Error("kernel row " + std::to_string(r) + ": " + why);
    }
  }
}

Kernel::Kernel(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw Error("kernel must have at least one row");
  std::vector<double> data;
  const int cols = static_cast<int>(rows.front().size());
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != cols) {
      throw Error("kernel rows have unequal lengths");
    }
    data.insert(data.end(), row.begin(), row.end());
  }
  *this = Kernel(static_cast<int>(rows.size()), cols, std::move(data));
}

Kernel Kernel::Deterministic(int cols, const std::vector<int>& targets) {
  std::vector<double> data(targets.size() * cols, 0.0);
  for (size_t r = 0; r < targets.size(); ++r) {
    if (targets[r] < 0 || targets[r] >= cols) {
      throw Error("deterministic kernel target out of range");
    }
    data[r * cols + targets[r]] = 1.0;
  }
  return Kernel(static_cast<int>(targets.size()), cols, std::move(data));
}

Kernel Kernel::Uniform(int rows, int cols) {
  return Kernel(rows, cols, std::vector<double>(rows * cols, 1.0 / cols));
}

Kernel Kernel::Unchecked(int rows, int cols, std::vector<double> data) {
  Kernel k;
  k.rows_ = rows;
  k.cols_ = cols;
  k.data_ = std::move(data);
  return k;
}

std::vector<std::vector<double>> Kernel::ToRows() const {
  std::vector<std::vector<double>> out;
  for (int r = 0; r < rows_; ++r) {
    auto row = Row(r);
    out.emplace_back(row.begin(), row.end());
  }
  return out;
}

double Kernel::MaxRowTv(const Kernel& other) const {
  if (rows_ != other.rows_ || cols_ != other.cols_) {
    throw Error("kernel shape mismatch");
  }
  double worst = 0.0;
  for (int r = 0; r < rows_; ++r) {
    worst = std::max(worst, TotalVariation(Row(r), other.Row(r)));
  }
  return worst;
}

Kernel Blend(const Kernel& a, const Kernel& b, double alpha) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error("kernel shape mismatch");
  }
  std::vector<double> data(a.data().size());
  for (int r = 0; r < a.rows(); ++r) {
    double total = 0.0;
    for (int c = 0; c < a.cols(); ++c) {
      const double v = (1.0 - alpha) * a(r, c) + alpha * b(r, c);
      data[r * a.cols() + c] = v;
      total += v;
    }
    // Renormalize so repeated blending never drifts off the simplex.
    for (int c = 0; c < a.cols(); ++c) data[r * a.cols() + c] /= total;
  }
  return Kernel(a.rows(), a.cols(), std::move(data));
}

ProbVec EmpMeasure(std::span<const int> actions, int size) {
  if (actions.empty()) throw Error("empty empirical sample");
  std::vector<int> counts(size, 0);
  for (int a : actions) {
    if (a < 0 || a >= size) throw Error("empirical sample index out of range");
    ++counts[a];
  }
  return EmpFromCounts(counts);
}

ProbVec EmpFromCounts(std::span<const int> counts) {
  const int total = std::accumulate(counts.begin(), counts.end(), 0);
  if (total <= 0) throw Error("empty empirical sample");
  std::vector<double> w(counts.size());
  for (size_t i = 0; i < counts.size(); ++i) {
    w[i] = static_cast<double>(counts[i]) / total;
  }
  return ProbVec(std::move(w));
}

int SampleIndex(std::span<const double> weights, double u) {
  double cumulative = 0.0;
  int last_positive = -1;
  for (size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    last_positive = static_cast<int>(i);
    cumulative += weights[i];
    if (u < cumulative) return static_cast<int>(i);
  }
  if (last_positive < 0) throw Error("cannot sample from zero weights");
  return last_positive;
}

}  // namespace teamfield

namespace teamfield {

std::int64_t SimplexGridSize(int dim, int steps) {
  // C(steps + dim - 1, dim - 1), saturating.
  long double count = 1.0L;
  for (int i = 1; i < dim; ++i) count = count * (steps + i) / i;
  if (count > 9e18L) return std::numeric_limits<std::int64_t>::max();
  return static_cast<std::int64_t>(count + 0.5L);
}

std::vector<std::vector<double>> SimplexGrid(int dim, int steps) {
  std::vector<std::vector<double>> out;
  std::vector<int> parts(dim, 0);
  // Recursive fill: index i takes values from the remaining mass downward.
  auto fill = [&](auto&& self, int index, int remaining) -> void {
    if (index == dim - 1) {
      parts[index] = remaining;
      std::vector<double> point(dim);
      for (int i = 0; i < dim; ++i) {
        point[i] = static_cast<double>(parts[i]) / steps;
      }
      out.push_back(std::move(point));
      return;
    }
    for (int v = remaining; v >= 0; --v) {
      parts[index] = v;
      self(self, index + 1, remaining - v);
    }
  };
  fill(fill, 0, steps);
  return out;
}

int StepsForResolution(double resolution) {
  if (!(resolution > 0.0) || resolution > 1.0) {
    throw Error("resolution must lie in (0, 1]");
  }
  const double steps = 1.0 / resolution;
  const double rounded = std::round(steps);
  if (std::abs(steps - rounded) > 1e-6 * rounded) {
    throw Error("1/resolution must be an integer");
  }
  return static_cast<int>(rounded);
}

}  // namespace teamfield
