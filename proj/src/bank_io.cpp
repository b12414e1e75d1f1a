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

#include "fedsgt/bank_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace fedsgt {

namespace {

template <typename U>
void put_le(std::string& out, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
  }
}

void put_f64(std::string& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename U>
  U get() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      v |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(U);
    return v;
  }

  double f64() { return std::bit_cast<double>(get<std::uint64_t>()); }

  void matrix(RowMatrix<double>& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = f64();
    }
  }

  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw corrupt_error("module bank truncated");
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

void put_matrix(std::string& out, const RowMatrix<double>& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) put_f64(out, m(i, j));
  }
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::string serialize_matrix(const RowMatrix<double>& m) {
  std::string out;
  put_matrix(out, m);
  return out;
}

std::string serialize_module(const AdapterModule& module) {
  std::string out;
  put_le<std::uint32_t>(out, module.group.value);
  put_le<std::uint64_t>(out, module.samples);
  put_matrix(out, module.weights);
  return out;
}

std::string serialize_bank(const ModuleBank& bank) {
  std::string out(kBankMagic, 4);
  put_le<std::uint32_t>(out, kBankVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(bank.group_count()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(bank.sequence_count()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(bank.feature_dim));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(bank.label_count));
  put_matrix(out, bank.backbone);
  for (const auto& seq : bank.modules) {
    for (const auto& m : seq) out += serialize_module(m);
  }
  put_le<std::uint64_t>(out, fnv1a64(out));
  return out;
}

ModuleBank deserialize_bank(std::string_view bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kBankMagic, 4) != 0) {
    throw corrupt_error("not a module bank (bad magic)");
  }
  if (bytes.size() < 12) throw corrupt_error("module bank truncated");
  const std::string_view body = bytes.substr(0, bytes.size() - 8);
  Reader tail(bytes.substr(bytes.size() - 8));
  if (tail.get<std::uint64_t>() != fnv1a64(body)) throw corrupt_error("module bank checksum mismatch");

  Reader in(body.substr(4));
  const auto version = in.get<std::uint32_t>();
  if (version != kBankVersion) {
    throw corrupt_error("unsupported module bank version " + std::to_string(version));
  }
  const auto L = in.get<std::uint32_t>();
  const auto B = in.get<std::uint32_t>();
  ModuleBank bank;
  bank.feature_dim = in.get<std::uint32_t>();
  bank.label_count = in.get<std::uint32_t>();
  const auto k = static_cast<Eigen::Index>(bank.label_count);
  const auto d = static_cast<Eigen::Index>(bank.feature_dim);
  const std::size_t expected =
      4 + 20 + 8 * static_cast<std::size_t>(k * d) * (1 + std::size_t{L} * B) +
      std::size_t{12} * L * B;
  if (body.size() != expected) throw corrupt_error("module bank size does not match header");

  bank.backbone.resize(k, d);
  in.matrix(bank.backbone);
  bank.modules.resize(B);
  for (auto& seq : bank.modules) {
    seq.resize(L);
    for (auto& m : seq) {
      m.group = GroupId(in.get<std::uint32_t>());
      if (m.group.get() >= L) throw corrupt_error("module bank: group id out of range");
      m.samples = in.get<std::uint64_t>();
      m.weights.resize(k, d);
      in.matrix(m.weights);
    }
  }
  return bank;
}

void write_bank(const std::string& path, const ModuleBank& bank) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot write " + path);
  const std::string bytes = serialize_bank(bank);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw io_error("short write to " + path);
}

ModuleBank read_bank(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_bank(bytes);
}

}  // namespace fedsgt
