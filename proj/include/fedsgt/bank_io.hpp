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

#ifndef FEDSGT_BANK_IO_HPP
#define FEDSGT_BANK_IO_HPP

#include <cstdint>
#include <string>
#include <string_view>

#include "fedsgt/fltrain.hpp"

namespace fedsgt {

// Module-bank container, all integers and floats little-endian:
//
//   "FSGT"  u32 version  u32 L  u32 B  u32 d  u32 k
//   backbone: k*d f64, row-major
//   B x L records: u32 group, u64 samples, k*d f64 adapter (row-major)
//   u64 FNV-1a checksum of every preceding byte
inline constexpr char kBankMagic[4] = {'F', 'S', 'G', 'T'};
inline constexpr std::uint32_t kBankVersion = 1;

std::string serialize_bank(const ModuleBank& bank);
/// Throws a corrupt-artifact error on bad magic, version, size or checksum.
ModuleBank deserialize_bank(std::string_view bytes);

/// Canonical bytes of one module (group, samples, weights).
std::string serialize_module(const AdapterModule& module);
std::string serialize_matrix(const RowMatrix<double>& m);

void write_bank(const std::string& path, const ModuleBank& bank);
ModuleBank read_bank(const std::string& path);

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace fedsgt

#endif  // FEDSGT_BANK_IO_HPP
