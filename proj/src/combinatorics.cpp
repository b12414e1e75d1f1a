/*
 * Copyright 2026 The FedSGT Simulator Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "fedsgt/combinatorics.hpp"

#include <cmath>
#include <mutex>
#include <vector>

#include "fedsgt/core_types.hpp"

namespace fedsgt::combinatorics {

namespace {

constexpr std::uint64_t kStirlingMemoRows = 256;

class StirlingTable {
 public:
  ExactInteger get(std::uint64_t r, std::uint64_t m) {
    std::lock_guard<std::mutex> lock(mutex_);
    while (rows_.size() <= r) extend();
    return rows_[r][m];
  }

 private:
  void extend() {
    if (rows_.empty()) {
      rows_.push_back({ExactInteger(1)});
      return;
    }
    const auto& prev = rows_.back();
    const std::size_t n = rows_.size();
    std::vector<ExactInteger> row(n + 1, ExactInteger(0));
    for (std::size_t m = 1; m <= n; ++m) {
      ExactInteger v = m < prev.size() ? prev[m] * m : ExactInteger(0);
      v += prev[m - 1];
      row[m] = std::move(v);
    }
    rows_.push_back(std::move(row));
  }

  std::mutex mutex_;
  std::vector<std::vector<ExactInteger>> rows_;
};

StirlingTable& table() {
  static StirlingTable t;
  return t;
}

ExactInteger stirling_uncached(std::uint64_t r, std::uint64_t m) {
  std::vector<ExactInteger> row{ExactInteger(1)};
  for (std::uint64_t n = 1; n <= r; ++n) {
    std::vector<ExactInteger> next(std::min<std::uint64_t>(n, m) + 1, ExactInteger(0));
    for (std::size_t j = 1; j < next.size(); ++j) {
      ExactInteger v = j < row.size() ? row[j] * j : ExactInteger(0);
      if (j - 1 < row.size()) v += row[j - 1];
      next[j] = std::move(v);
    }
    row = std::move(next);
  }
  return m < row.size() ? row[m] : ExactInteger(0);
}

}  // namespace

ExactRatio harmonic(std::uint64_t n) {
  if (n == 0) throw domain_error("harmonic: n must be >= 1");
  ExactRatio sum(0);
  for (std::uint64_t i = 1; i <= n; ++i) sum += ExactRatio(1, i);
  return sum;
}

ExactInteger binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  ExactInteger result(1);
  for (std::uint64_t i = 1; i <= k; ++i) {
    result *= n - k + i;
    result /= i;  // exact: result is C(n-k+i, i) here
  }
  return result;
}

ExactInteger stirling2(std::uint64_t r, std::uint64_t m) {
  if (m > r) return 0;
  if (r <= kStirlingMemoRows) return table().get(r, m);
  return stirling_uncached(r, m);
}

ExactInteger factorial(std::uint64_t n) {
  ExactInteger f(1);
  for (std::uint64_t i = 2; i <= n; ++i) f *= i;
  return f;
}

ExactInteger power(std::uint64_t base, std::uint64_t exp) {
  return boost::multiprecision::pow(ExactInteger(base), static_cast<unsigned>(exp));
}

double to_double(const ExactInteger& z) {
  if (z == 0) return 0.0;
  const ExactInteger mag = abs(z);
  const long bits = static_cast<long>(msb(mag)) + 1;
  const long shift = bits > 64 ? bits - 64 : 0;
  const ExactInteger top = mag >> shift;
  double v = std::ldexp(top.convert_to<double>(), static_cast<int>(shift));
  return z < 0 ? -v : v;
}

double to_double(const ExactRatio& q) {
  const ExactInteger num = boost::multiprecision::numerator(q);
  const ExactInteger den = boost::multiprecision::denominator(q);
  if (num == 0) return 0.0;
  const ExactInteger mag = abs(num);
  // Scale so the integer quotient carries at least 64 significant bits.
  const long shift = 64 + static_cast<long>(msb(den)) - static_cast<long>(msb(mag));
  ExactInteger quotient;
  if (shift >= 0) {
    quotient = (mag << shift) / den;
  } else {
    quotient = mag / (den << -shift);
  }
  double v = std::ldexp(to_double(quotient), static_cast<int>(-shift));
  return num < 0 ? -v : v;
}

}  // namespace fedsgt::combinatorics
