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

#ifndef FEDSGT_COMBINATORICS_HPP
#define FEDSGT_COMBINATORICS_HPP

#include <cstdint>

#include <boost/multiprecision/cpp_int.hpp>

namespace fedsgt {

using ExactInteger = boost::multiprecision::cpp_int;
/// Always stored in lowest terms with a positive denominator.
using ExactRatio = boost::multiprecision::cpp_rational;

namespace combinatorics {

/// H_n = 1 + 1/2 + ... + 1/n. Throws a domain error for n == 0.
ExactRatio harmonic(std::uint64_t n);

/// C(n, k); zero when k > n.
ExactInteger binomial(std::uint64_t n, std::uint64_t k);

/// Stirling number of the second kind S(r, m). Rows up to r = 256 are
/// memoized in a process-wide table.
ExactInteger stirling2(std::uint64_t r, std::uint64_t m);

ExactInteger factorial(std::uint64_t n);
ExactInteger power(std::uint64_t base, std::uint64_t exp);

/// Correctly scaled conversion; does not overflow when numerator and
/// denominator individually exceed the double range.
double to_double(const ExactRatio& q);
double to_double(const ExactInteger& z);

}  // namespace combinatorics
}  // namespace fedsgt

#endif  // FEDSGT_COMBINATORICS_HPP
