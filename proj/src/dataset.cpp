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

#include "fedsgt/dataset.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "fedsgt/rng.hpp"

namespace fedsgt {

template <typename Scalar>
void Samples<Scalar>::erase_front(std::size_t count) {
  count = std::min(count, size());
  const auto rest = static_cast<Eigen::Index>(size() - count);
  RowMatrix<Scalar> kept = features.bottomRows(rest);
  features = std::move(kept);
  labels.erase(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(count));
}

template <typename Scalar>
void Samples<Scalar>::append(const Samples& other) {
  if (other.empty()) return;
  if (empty()) {
    *this = other;
    return;
  }
  RowMatrix<Scalar> merged(features.rows() + other.features.rows(), features.cols());
  merged << features, other.features;
  features = std::move(merged);
  labels.insert(labels.end(), other.labels.begin(), other.labels.end());
}

template <typename Scalar>
std::size_t ClientData<Scalar>::size() const {
  std::size_t n = 0;
  for (const auto& s : slices) n += s.size();
  return n;
}

template <typename Scalar>
const Samples<Scalar>& BasicDataset<Scalar>::slice(const SliceRef& ref) const {
  if (ref.client.get() >= clients.size() ||
      ref.slice.get() >= clients[ref.client.get()].slices.size()) {
    throw lookup_error("dataset has no slice (" + std::to_string(ref.client.value) + "," +
                       std::to_string(ref.slice.value) + ")");
  }
  return clients[ref.client.get()].slices[ref.slice.get()];
}

template <typename Scalar>
Samples<Scalar>& BasicDataset<Scalar>::slice(const SliceRef& ref) {
  return const_cast<Samples<Scalar>&>(std::as_const(*this).slice(ref));
}

template <typename Scalar>
std::size_t BasicDataset<Scalar>::train_size() const {
  std::size_t n = 0;
  for (const auto& c : clients) n += c.size();
  return n;
}

template <typename Scalar>
std::vector<SliceInfo> BasicDataset<Scalar>::catalog() const {
  std::vector<SliceInfo> out;
  for (std::size_t c = 0; c < clients.size(); ++c) {
    for (std::size_t s = 0; s < clients[c].slices.size(); ++s) {
      out.push_back({SliceRef{ClientId(c), SliceIdx(s)}, clients[c].slices[s].size()});
    }
  }
  return out;
}

template <typename Scalar>
Samples<Scalar> BasicDataset<Scalar>::local_data(ClientId client, const GroupingPlan& plan,
                                                 const std::vector<bool>& groups) const {
  Samples<Scalar> out;
  out.features.resize(0, static_cast<Eigen::Index>(feature_dim));
  const auto& slices = clients.at(client.get()).slices;
  std::size_t rows = 0;
  std::vector<std::size_t> picked;
  for (std::size_t s = 0; s < slices.size(); ++s) {
    const SliceRef ref{client, SliceIdx(s)};
    if (!plan.contains(ref) || !groups[plan.group_of(ref).get()]) continue;
    picked.push_back(s);
    rows += slices[s].size();
  }
  out.features.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(feature_dim));
  out.labels.reserve(rows);
  Eigen::Index at = 0;
  for (std::size_t s : picked) {
    const auto& src = slices[s];
    out.features.middleRows(at, src.features.rows()) = src.features;
    at += src.features.rows();
    out.labels.insert(out.labels.end(), src.labels.begin(), src.labels.end());
  }
  return out;
}

template <typename Scalar>
Samples<Scalar> BasicDataset<Scalar>::client_data(ClientId client) const {
  Samples<Scalar> out;
  out.features.resize(0, static_cast<Eigen::Index>(feature_dim));
  for (const auto& s : clients.at(client.get()).slices) out.append(s);
  return out;
}

template struct Samples<double>;
template struct ClientData<double>;
template struct BasicDataset<double>;

namespace {

void fill_sample(SplitMix64& rng, const RowMatrix<double>& means, int label, double noise,
                 double scale, Eigen::Ref<RowMatrix<double>> row) {
  for (Eigen::Index j = 0; j < means.cols(); ++j) {
    row(0, j) = (means(label, j) + noise * rng.normal()) * scale;
  }
}

}  // namespace

Dataset synth_dataset(const SynthSpec& spec) {
  if (spec.clients == 0 || spec.samples_per_client == 0 || spec.slices_per_client == 0 ||
      spec.feature_dim == 0 || spec.label_count == 0) {
    throw config_error("synth_dataset: all counts must be positive");
  }
  if (spec.label_count > spec.samples_per_client * spec.clients) {
    throw config_error("synth_dataset: more labels than training samples");
  }
  if (spec.slices_per_client > spec.samples_per_client) {
    throw config_error("synth_dataset: slices would be empty");
  }
  if (spec.alpha && !(*spec.alpha > 0.0)) throw config_error("synth_dataset: alpha must be > 0");

  const auto d = static_cast<Eigen::Index>(spec.feature_dim);
  const auto k = static_cast<Eigen::Index>(spec.label_count);
  const double scale = 1.0 / std::sqrt(static_cast<double>(spec.feature_dim));

  Dataset ds;
  ds.feature_dim = spec.feature_dim;
  ds.label_count = spec.label_count;

  RowMatrix<double> means(k, d);
  SplitMix64 mean_rng = derive_stream(spec.seed, {1});
  for (Eigen::Index c = 0; c < k; ++c) {
    for (Eigen::Index j = 0; j < d; ++j) means(c, j) = mean_rng.normal();
    means.row(c) *= spec.separation / means.row(c).norm();
  }

  ds.clients.resize(spec.clients);
  for (std::size_t i = 0; i < spec.clients; ++i) {
    SplitMix64 rng = derive_stream(spec.seed, {2, i});
    std::vector<double> mix(spec.label_count, 1.0 / static_cast<double>(spec.label_count));
    if (spec.alpha) mix = rng.dirichlet(spec.label_count, *spec.alpha);

    Samples<double> all;
    all.features.resize(static_cast<Eigen::Index>(spec.samples_per_client), d);
    for (std::size_t n = 0; n < spec.samples_per_client; ++n) {
      const double u = rng.uniform();
      int label = static_cast<int>(spec.label_count) - 1;
      double acc = 0.0;
      for (std::size_t c = 0; c < spec.label_count; ++c) {
        acc += mix[c];
        if (u < acc) {
          label = static_cast<int>(c);
          break;
        }
      }
      all.labels.push_back(label);
      fill_sample(rng, means, label, spec.noise, scale,
                  all.features.row(static_cast<Eigen::Index>(n)));
    }

    const std::size_t S = spec.slices_per_client;
    const std::size_t base = spec.samples_per_client / S;
    const std::size_t extra = spec.samples_per_client % S;
    std::size_t at = 0;
    for (std::size_t s = 0; s < S; ++s) {
      const std::size_t n = base + (s < extra ? 1 : 0);
      Samples<double> slice;
      slice.features = all.features.middleRows(static_cast<Eigen::Index>(at),
                                               static_cast<Eigen::Index>(n));
      slice.labels.assign(all.labels.begin() + static_cast<std::ptrdiff_t>(at),
                          all.labels.begin() + static_cast<std::ptrdiff_t>(at + n));
      ds.clients[i].slices.push_back(std::move(slice));
      at += n;
    }
  }

  SplitMix64 test_rng = derive_stream(spec.seed, {3});
  ds.test.features.resize(static_cast<Eigen::Index>(spec.test_samples), d);
  for (std::size_t n = 0; n < spec.test_samples; ++n) {
    const int label = static_cast<int>(n % spec.label_count);
    ds.test.labels.push_back(label);
    fill_sample(test_rng, means, label, spec.noise, scale,
                ds.test.features.row(static_cast<Eigen::Index>(n)));
  }
  return ds;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    if (!field.empty() && field.back() == '\r') field.pop_back();
    out.push_back(field);
  }
  return out;
}

}  // namespace

Dataset load_csv_dataset(const std::string& data_path, const std::string& manifest_path) {
  std::ifstream data(data_path);
  if (!data) throw io_error("cannot open dataset " + data_path);
  std::ifstream manifest(manifest_path);
  if (!manifest) throw io_error("cannot open manifest " + manifest_path);

  std::string line;
  std::getline(data, line);
  const auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "label") {
    throw config_error("dataset header must be label,f0,f1,...");
  }
  std::getline(manifest, line);
  if (split_csv_line(line) != std::vector<std::string>{"client", "slice", "split"}) {
    throw config_error("manifest header must be client,slice,split");
  }

  struct Row {
    int label;
    std::vector<double> x;
    std::size_t client, slice;
    bool test;
  };
  std::vector<Row> rows;
  int max_label = -1;
  std::size_t max_client = 0;
  std::size_t line_no = 1;
  std::string mline;
  while (std::getline(data, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (!std::getline(manifest, mline)) throw config_error("manifest has fewer rows than dataset");
    const auto f = split_csv_line(line);
    const auto m = split_csv_line(mline);
    if (f.size() != header.size() || m.size() != 3) {
      throw config_error("malformed row at line " + std::to_string(line_no));
    }
    Row r;
    try {
      r.label = std::stoi(f[0]);
      for (std::size_t j = 1; j < f.size(); ++j) r.x.push_back(std::stod(f[j]));
      r.client = std::stoul(m[0]);
      r.slice = std::stoul(m[1]);
    } catch (const std::exception&) {
      throw config_error("unparseable value at line " + std::to_string(line_no));
    }
    if (r.label < 0) throw config_error("negative label at line " + std::to_string(line_no));
    for (double v : r.x) {
      if (!std::isfinite(v)) throw config_error("non-finite feature at line " + std::to_string(line_no));
    }
    if (m[2] != "train" && m[2] != "test") throw config_error("split must be train or test");
    r.test = m[2] == "test";
    max_label = std::max(max_label, r.label);
    if (!r.test) max_client = std::max(max_client, r.client + 1);
    rows.push_back(std::move(r));
  }

  Dataset ds;
  ds.feature_dim = header.size() - 1;
  ds.label_count = static_cast<std::size_t>(max_label + 1);
  ds.clients.resize(max_client);
  std::vector<std::vector<std::vector<const Row*>>> buckets(max_client);
  std::vector<const Row*> test_rows;
  for (const auto& r : rows) {
    if (r.test) {
      test_rows.push_back(&r);
      continue;
    }
    auto& b = buckets[r.client];
    if (b.size() <= r.slice) b.resize(r.slice + 1);
    b[r.slice].push_back(&r);
  }
  auto pack = [&](const std::vector<const Row*>& src) {
    Samples<double> s;
    s.features.resize(static_cast<Eigen::Index>(src.size()),
                      static_cast<Eigen::Index>(ds.feature_dim));
    for (std::size_t n = 0; n < src.size(); ++n) {
      for (std::size_t j = 0; j < ds.feature_dim; ++j) {
        s.features(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j)) = src[n]->x[j];
      }
      s.labels.push_back(src[n]->label);
    }
    return s;
  };
  for (std::size_t c = 0; c < max_client; ++c) {
    if (buckets[c].empty()) throw config_error("client " + std::to_string(c) + " has no slices");
    for (std::size_t s = 0; s < buckets[c].size(); ++s) {
      if (buckets[c][s].empty()) {
        throw config_error("slice (" + std::to_string(c) + "," + std::to_string(s) + ") is empty");
      }
      ds.clients[c].slices.push_back(pack(buckets[c][s]));
    }
  }
  ds.test = pack(test_rows);
  return ds;
}

}  // namespace fedsgt
