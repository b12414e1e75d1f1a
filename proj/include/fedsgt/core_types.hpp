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

#ifndef FEDSGT_CORE_TYPES_HPP
#define FEDSGT_CORE_TYPES_HPP

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <stdexcept>
#include <string>

namespace fedsgt {

/// Zero-based index with a kind tag. Indices of different kinds do not
/// compare or convert into each other.
template <typename Tag>
struct Index {
  std::uint32_t value = 0;

  constexpr Index() = default;
  constexpr explicit Index(std::uint32_t v) : value(v) {}
  constexpr explicit Index(std::size_t v) : value(static_cast<std::uint32_t>(v)) {}
  constexpr explicit Index(int v) : value(static_cast<std::uint32_t>(v)) {}

  constexpr std::size_t get() const { return value; }
  constexpr auto operator<=>(const Index&) const = default;
};

template <typename Tag>
std::ostream& operator<<(std::ostream& os, Index<Tag> id) {
  return os << id.value;
}

struct ClientTag {};
struct SliceTag {};
struct GroupTag {};
struct SequenceTag {};
struct PhaseTag {};

using ClientId = Index<ClientTag>;
using SliceIdx = Index<SliceTag>;
using GroupId = Index<GroupTag>;
using SequenceId = Index<SequenceTag>;
using PhaseIdx = Index<PhaseTag>;

/// Atomic unit of client data: slice `slice` of client `client`.
struct SliceRef {
  ClientId client;
  SliceIdx slice;

  constexpr auto operator<=>(const SliceRef&) const = default;
};

enum class ServiceTag { Available, Failed };

struct ServiceStatus {
  ServiceTag tag = ServiceTag::Available;
  std::size_t surviving = 0;
  std::string reason;

  static ServiceStatus from_survivors(std::size_t n) {
    if (n == 0) return {ServiceTag::Failed, 0, "no surviving model"};
    return {ServiceTag::Available, n, {}};
  }
  bool available() const { return tag == ServiceTag::Available; }
};

const char* to_string(ServiceTag tag);

enum class ErrorKind {
  Domain,         // argument outside the mathematical domain
  Config,         // inconsistent or invalid configuration
  Lookup,         // unknown identifier
  Training,       // numerical failure during training
  Corrupt,        // damaged or unreadable artifact
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error domain_error(const std::string& what) { return {ErrorKind::Domain, what}; }
inline Error config_error(const std::string& what) { return {ErrorKind::Config, what}; }
inline Error lookup_error(const std::string& what) { return {ErrorKind::Lookup, what}; }
inline Error training_error(const std::string& what) { return {ErrorKind::Training, what}; }
inline Error corrupt_error(const std::string& what) { return {ErrorKind::Corrupt, what}; }
inline Error io_error(const std::string& what) { return {ErrorKind::Io, what}; }

enum class Strategy { AllSeq, MinSeq, LongSeq };

const char* to_string(Strategy s);
Strategy parse_strategy(const std::string& name);

}  // namespace fedsgt

template <>
struct std::hash<fedsgt::SliceRef> {
  std::size_t operator()(const fedsgt::SliceRef& s) const noexcept {
    return (static_cast<std::size_t>(s.client.value) << 32) ^ s.slice.value;
  }
};

#endif  // FEDSGT_CORE_TYPES_HPP
