// Copyright 2026 The AHSC Authors
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

#include "ahsc/data.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <string_view>

#include "ahsc/error.h"
#include "ahsc/random.h"

namespace ahsc {

namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> SplitCommas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(Trim(line.substr(start)));
      return cells;
    }
    cells.push_back(Trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

template <typename T>
std::optional<T> ParseWhole(std::string_view s) {
  T value{};
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end || s.empty()) return std::nullopt;
  return value;
}

std::string Where(std::size_t line, std::size_t col, const std::string& name) {
  return "line " + std::to_string(line) + ", column " + std::to_string(col + 1) + " ('" +
         name + "')";
}

}  // namespace

void Dataset::Validate() const {
  if (labels.empty()) Fail(ErrorKind::kData, "dataset has no samples");
  if (features.rows() != labels.size()) {
    Fail(ErrorKind::kData, "feature rows (" + std::to_string(features.rows()) +
                               ") != label count (" + std::to_string(labels.size()) + ")");
  }
  if (!features.all_finite()) Fail(ErrorKind::kData, "dataset has non-finite features");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_classes) {
      Fail(ErrorKind::kLabel, "label " + std::to_string(labels[i]) + " at row " +
                                  std::to_string(i) + " outside [0," +
                                  std::to_string(num_classes) + ")");
    }
  }
}

Dataset load_csv(const std::string& path, const std::string& label_column) {
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kData, "cannot open '" + path + "'");

  std::string header_line;
  if (!std::getline(in, header_line)) Fail(ErrorKind::kData, "'" + path + "' is empty");
  std::vector<std::string> header;
  for (auto cell : SplitCommas(header_line)) header.emplace_back(cell);

  std::size_t label_idx = header.size() - 1;
  if (!label_column.empty()) {
    auto it = std::find(header.begin(), header.end(), label_column);
    if (it == header.end()) {
      Fail(ErrorKind::kData, "label column '" + label_column + "' not in header of '" + path +
                                 "'");
    }
    label_idx = static_cast<std::size_t>(it - header.begin());
  }
  if (header.size() < 2) {
    Fail(ErrorKind::kData, "'" + path + "' needs at least one feature and a label column");
  }

  Dataset data;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != label_idx) data.feature_names.push_back(header[c]);
  }
  const std::size_t n = header.size() - 1;

  std::vector<double> values;
  std::vector<std::string> raw_labels;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    const auto cells = SplitCommas(line);
    if (cells.size() != header.size()) {
      Fail(ErrorKind::kData, "ragged row at line " + std::to_string(line_no) + ": expected " +
                                 std::to_string(header.size()) + " cells, found " +
                                 std::to_string(cells.size()));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c == label_idx) {
        raw_labels.emplace_back(cells[c]);
        continue;
      }
      const auto v = ParseWhole<double>(cells[c]);
      if (!v) {
        Fail(ErrorKind::kData, "non-numeric feature at " + Where(line_no, c, header[c]));
      }
      if (!std::isfinite(*v)) {
        Fail(ErrorKind::kData, "non-finite feature at " + Where(line_no, c, header[c]));
      }
      values.push_back(*v);
    }
  }
  if (raw_labels.empty()) Fail(ErrorKind::kData, "'" + path + "' has a header but no rows");

  bool numeric = true;
  int max_label = -1;
  for (const auto& s : raw_labels) {
    const auto v = ParseWhole<int>(s);
    if (!v || *v < 0) {
      numeric = false;
      break;
    }
    max_label = std::max(max_label, *v);
  }
  if (numeric) {
    for (const auto& s : raw_labels) data.labels.push_back(*ParseWhole<int>(s));
    data.num_classes = max_label + 1;
  } else {
    std::map<std::string, int> ids;
    for (const auto& s : raw_labels) {
      auto [it, inserted] = ids.try_emplace(s, static_cast<int>(data.class_names.size()));
      if (inserted) data.class_names.push_back(s);
      data.labels.push_back(it->second);
    }
    data.num_classes = static_cast<int>(data.class_names.size());
  }
  data.features = Matrix(raw_labels.size(), n, std::move(values));
  data.Validate();
  return data;
}

void write_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) Fail(ErrorKind::kData, "cannot write '" + path + "'");
  for (std::size_t c = 0; c < data.num_features(); ++c) {
    out << (c < data.feature_names.size() ? data.feature_names[c] : "x" + std::to_string(c))
        << ',';
  }
  out << "label\n";
  out.precision(17);
  for (std::size_t i = 0; i < data.num_samples(); ++i) {
    for (double v : data.features.row(i)) out << v << ',';
    const int y = data.labels[i];
    if (!data.class_names.empty()) {
      out << data.class_names[static_cast<std::size_t>(y)] << '\n';
    } else {
      out << y << '\n';
    }
  }
}

Dataset subset(const Dataset& data, std::span<const std::size_t> indices) {
  Dataset out;
  out.num_classes = data.num_classes;
  out.feature_names = data.feature_names;
  out.class_names = data.class_names;
  out.features = Matrix(indices.size(), data.num_features());
  out.labels.reserve(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto src = data.features.row(indices[r]);
    std::copy(src.begin(), src.end(), out.features.row(r).begin());
    out.labels.push_back(data.labels[indices[r]]);
  }
  return out;
}

SplitResult split(const Dataset& data, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    Fail(ErrorKind::kData, "test fraction must lie in (0, 1)");
  }
  data.Validate();
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(data.num_classes));
  for (std::size_t i = 0; i < data.num_samples(); ++i) {
    by_class[static_cast<std::size_t>(data.labels[i])].push_back(i);
  }

  SplitResult result;
  Rng rng(DeriveSeed(seed, StreamTag::kSplit));
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> test_idx;
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& members = by_class[c];
    if (members.empty()) continue;
    if (members.size() == 1) {
      result.warnings.push_back("class " + std::to_string(c) +
                                " has a single sample; kept in train");
      train_idx.push_back(members[0]);
      continue;
    }
    auto take = static_cast<std::size_t>(
        std::llround(static_cast<double>(members.size()) * test_fraction));
    take = std::clamp<std::size_t>(take, 1, members.size() - 1);
    std::shuffle(members.begin(), members.end(), rng);
    test_idx.insert(test_idx.end(), members.begin(), members.begin() + take);
    train_idx.insert(train_idx.end(), members.begin() + take, members.end());
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  result.train = subset(data, train_idx);
  result.test = subset(data, test_idx);
  return result;
}

Scaler Scaler::Fit(const Dataset& data, std::string source) {
  if (data.num_samples() == 0) Fail(ErrorKind::kData, "cannot fit a scaler on no rows");
  Scaler s;
  const std::size_t m = data.num_samples();
  const std::size_t n = data.num_features();
  s.mean.assign(n, 0.0);
  s.stddev.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) s.mean[j] += data.features(i, j);
  }
  for (double& mu : s.mean) mu /= static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double d = data.features(i, j) - s.mean[j];
      s.stddev[j] += d * d;
    }
  }
  for (double& sd : s.stddev) sd = std::max(std::sqrt(sd / static_cast<double>(m)), kStdFloor);
  s.fit_rows = m;
  s.source = std::move(source);
  return s;
}

Dataset Scaler::Apply(const Dataset& data) const {
  if (data.num_features() != mean.size()) {
    Fail(ErrorKind::kShape, "scaler fitted on " + std::to_string(mean.size()) +
                                " features applied to " + std::to_string(data.num_features()));
  }
  Dataset out = data;
  for (std::size_t i = 0; i < out.num_samples(); ++i) {
    for (std::size_t j = 0; j < mean.size(); ++j) {
      // A floored deviation marks a constant column; map it to exactly zero
      // rather than amplifying the rounding error in the mean.
      out.features(i, j) =
          stddev[j] <= kStdFloor ? 0.0 : (out.features(i, j) - mean[j]) / stddev[j];
    }
  }
  return out;
}

StandardizeResult standardize(const Dataset& train, const Dataset& test) {
  StandardizeResult r;
  r.scaler = Scaler::Fit(train);
  r.train = r.scaler.Apply(train);
  r.test = r.scaler.Apply(test);
  return r;
}

std::vector<IndexBatch> batches(std::size_t num_samples, std::size_t batch_size,
                                std::optional<std::uint64_t> shuffle_seed) {
  if (batch_size == 0) Fail(ErrorKind::kData, "batch size must be >= 1");
  std::vector<std::size_t> order(num_samples);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (shuffle_seed) {
    Rng rng(*shuffle_seed);
    std::shuffle(order.begin(), order.end(), rng);
  }
  std::vector<IndexBatch> out;
  for (std::size_t start = 0; start < num_samples; start += batch_size) {
    const std::size_t stop = std::min(num_samples, start + batch_size);
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                     order.begin() + static_cast<std::ptrdiff_t>(stop));
  }
  return out;
}

std::vector<IndexBatch> batches(const Dataset& data, std::size_t batch_size,
                                std::optional<std::uint64_t> shuffle_seed) {
  return batches(data.num_samples(), batch_size, shuffle_seed);
}

Batch gather(const Dataset& data, std::span<const std::size_t> indices) {
  Batch b;
  b.features = Matrix(indices.size(), data.num_features());
  b.labels.reserve(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] >= data.num_samples()) {
      Fail(ErrorKind::kShape, "batch index " + std::to_string(indices[r]) + " out of range");
    }
    const auto src = data.features.row(indices[r]);
    std::copy(src.begin(), src.end(), b.features.row(r).begin());
    b.labels.push_back(data.labels[indices[r]]);
  }
  return b;
}

Batch whole(const Dataset& data) { return Batch{data.features, data.labels}; }

Dataset synthetic_blobs(const BlobSpec& spec) {
  if (spec.m_per_class == 0 || spec.k < 1 || spec.dim == 0) {
    Fail(ErrorKind::kData, "blob counts must all be >= 1");
  }
  if (!(spec.noise_std >= 0.0)) Fail(ErrorKind::kData, "blob noise must be >= 0");
  const auto k = static_cast<std::size_t>(spec.k);
  const std::size_t m = spec.m_per_class * k;

  Dataset data;
  data.num_classes = spec.k;
  for (std::size_t j = 0; j < spec.dim; ++j) data.feature_names.push_back("x" + std::to_string(j));
  data.features = Matrix(m, spec.dim);
  data.labels.resize(m);

  Rng rng(DeriveSeed(spec.seed, StreamTag::kBlobs));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t c = i % k;
    data.labels[i] = static_cast<int>(c);
    const std::size_t axis = c % spec.dim;
    const double sign = (c / spec.dim) % 2 == 0 ? 1.0 : -1.0;
    for (std::size_t j = 0; j < spec.dim; ++j) {
      const double centre = j == axis ? sign * spec.separation : 0.0;
      data.features(i, j) = centre + spec.noise_std * normal(rng);
    }
  }
  return data;
}

BlobSpec parse_blob_spec(const std::string& text) {
  std::string_view s = text;
  constexpr std::string_view kPrefix = "blobs";
  if (s.substr(0, kPrefix.size()) != kPrefix) {
    Fail(ErrorKind::kData, "synthetic spec must start with 'blobs', got '" + text + "'");
  }
  s.remove_prefix(kPrefix.size());
  BlobSpec spec;
  if (s.empty()) return spec;
  if (s.front() != ':') Fail(ErrorKind::kData, "malformed synthetic spec '" + text + "'");
  s.remove_prefix(1);
  for (auto item : SplitCommas(s)) {
    if (item.empty()) continue;
    const std::size_t eq = item.find('=');
    if (eq == std::string_view::npos) {
      Fail(ErrorKind::kData, "expected key=value in synthetic spec, got '" + std::string(item) +
                                 "'");
    }
    const auto key = item.substr(0, eq);
    const auto val = item.substr(eq + 1);
    auto need_uint = [&]() {
      auto v = ParseWhole<std::uint64_t>(val);
      if (!v) Fail(ErrorKind::kData, "bad integer for '" + std::string(key) + "'");
      return *v;
    };
    auto need_real = [&]() {
      auto v = ParseWhole<double>(val);
      if (!v) Fail(ErrorKind::kData, "bad number for '" + std::string(key) + "'");
      return *v;
    };
    if (key == "m") {
      spec.m_per_class = need_uint();
    } else if (key == "k") {
      spec.k = static_cast<int>(need_uint());
    } else if (key == "dim") {
      spec.dim = need_uint();
    } else if (key == "sep") {
      spec.separation = need_real();
    } else if (key == "noise") {
      spec.noise_std = need_real();
    } else if (key == "seed") {
      spec.seed = need_uint();
    } else {
      Fail(ErrorKind::kData, "unknown synthetic key '" + std::string(key) + "'");
    }
  }
  return spec;
}

}  // namespace ahsc
