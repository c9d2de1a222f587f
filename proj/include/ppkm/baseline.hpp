/*
 * Copyright 2026 The ppkmeans Authors.
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

#pragma once

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ppkm/random.hpp"
#include "ppkm/tensor.hpp"

// Plaintext side: the reference Lloyd implementation that the secure
// protocols are checked against, the four-Gaussian test dataset, and the
// horizontal/vertical partition splitter.

namespace ppkm {

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PlainDataset {
  Matrix points;
  std::optional<std::vector<std::size_t>> labels;
  std::uint64_t seed = 0;

  std::size_t size() const { return points.rows(); }
  std::size_t dims() const { return points.cols(); }
};

struct GaussianComponent {
  std::vector<double> mean;
  double sigma = 1.0;
  std::size_t count = 0;
};

inline std::vector<GaussianComponent> default_components() {
  return {{{5.0, 3.0}, 1.0, 100},
          {{5.0, -5.0}, 1.0, 100},
          {{-5.0, 5.0}, 1.0, 100},
          {{-3.0, -5.0}, 1.0, 100}};
}

// Points are emitted component by component. Coordinates are filled from
// Box-Muller pairs in order (z0 -> axis 0, z1 -> axis 1, next pair -> axes 2
// and 3, ...); an odd trailing axis discards z1.
inline PlainDataset gen_gaussian_mixture(std::uint64_t seed,
                                         std::span<const GaussianComponent> components) {
  if (components.empty()) throw DataError("gaussian mixture: no components");
  const std::size_t d = components[0].mean.size();
  if (d == 0) throw DataError("gaussian mixture: zero-dimensional means");
  std::size_t n = 0;
  for (const auto& c : components) {
    if (c.mean.size() != d) throw DataError("gaussian mixture: inconsistent dimensions");
    if (!(c.sigma >= 0.0)) throw DataError("gaussian mixture: negative sigma");
    n += c.count;
  }

  Rng rng(derive_seed(seed, "gaussian-mixture"));
  PlainDataset out{Matrix(n, d), std::vector<std::size_t>(n), seed};
  std::size_t row = 0;
  for (std::size_t comp = 0; comp < components.size(); ++comp) {
    const auto& c = components[comp];
    for (std::size_t i = 0; i < c.count; ++i, ++row) {
      for (std::size_t a = 0; a < d; a += 2) {
        const auto [z0, z1] = rng.normal_pair();
        out.points(row, a) = c.mean[a] + c.sigma * z0;
        if (a + 1 < d) out.points(row, a + 1) = c.mean[a + 1] + c.sigma * z1;
      }
      (*out.labels)[row] = comp;
    }
  }
  return out;
}

inline PlainDataset gen_gaussian_mixture(std::uint64_t seed) {
  const auto comps = default_components();
  return gen_gaussian_mixture(seed, comps);
}

// k distinct public row indices for initialization.
inline std::vector<std::size_t> draw_init_indices(Rng& rng, std::size_t n, std::size_t k) {
  if (k == 0 || k > n) {
    throw DataError("k must be in [1, n]; got k=" + std::to_string(k) +
                    ", n=" + std::to_string(n));
  }
  return rng.sample_distinct(n, k);
}

enum class EmptyClusterPolicy { kKeep, kReseed };

// Public row that re-seeds cluster `cluster` when it comes up empty in
// `iteration` (1-based) under the reseed policy.
inline std::size_t reseed_index(std::uint64_t seed, std::size_t iteration,
                                std::size_t cluster, std::size_t n) {
  const std::uint64_t h =
      derive_seed(derive_seed(derive_seed(seed, "reseed"), iteration), cluster);
  return static_cast<std::size_t>(h % n);
}

struct PlainKMeansOptions {
  std::size_t k = 4;
  double epsilon = 1e-4;
  std::size_t max_iters = 100;
  std::vector<std::size_t> init_indices;
  EmptyClusterPolicy empty_policy = EmptyClusterPolicy::kKeep;
  std::uint64_t reseed_seed = 0;
};

struct PlainKMeansResult {
  Matrix centers;
  std::vector<std::size_t> labels;
  std::vector<std::vector<std::size_t>> label_history;
  std::vector<std::vector<std::size_t>> t_history;
  std::vector<double> inertia;  // after each center update
  std::vector<double> movement;
  std::size_t iterations = 0;
  bool converged = false;
  // Smallest gap between the nearest and second-nearest center over all
  // assignments made; a tie-freeness certificate for equivalence tests.
  double min_margin = std::numeric_limits<double>::infinity();
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    const double diff = a[c] - b[c];
    s += diff * diff;
  }
  return s;
}

// Nearest center per row, earliest index on ties.
inline std::vector<std::size_t> nearest_centers(const Matrix& x, const Matrix& centers,
                                                double* min_margin = nullptr) {
  if (x.cols() != centers.cols()) throw ShapeError("nearest_centers: dimension mismatch");
  std::vector<std::size_t> labels(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    double second = best;
    for (std::size_t j = 0; j < centers.rows(); ++j) {
      const double dist = squared_distance(x.row(i), centers.row(j));
      if (dist < best) {
        second = best;
        best = dist;
        labels[i] = j;
      } else if (dist < second) {
        second = dist;
      }
    }
    if (min_margin && centers.rows() > 1) *min_margin = std::min(*min_margin, second - best);
  }
  return labels;
}

inline double inertia(const Matrix& x, const Matrix& centers,
                      std::span<const std::size_t> labels) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    s += squared_distance(x.row(i), centers.row(labels[i]));
  }
  return s;
}

inline Matrix gather_rows(const Matrix& x, std::span<const std::size_t> idx) {
  Matrix out(idx.size(), x.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] >= x.rows()) throw DataError("row index out of range");
    std::ranges::copy(x.row(idx[r]), out.row(r).begin());
  }
  return out;
}

// Lloyd's algorithm with the same schedule as the secure protocols: assign,
// update (empty clusters per policy), stop once the total squared center
// movement is <= epsilon.
inline PlainKMeansResult plain_kmeans(const Matrix& x, const PlainKMeansOptions& opt) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  if (opt.init_indices.size() != opt.k) {
    throw DataError("plain_kmeans: expected " + std::to_string(opt.k) +
                    " init indices, got " + std::to_string(opt.init_indices.size()));
  }
  if (opt.k == 0 || opt.k > n) throw DataError("plain_kmeans: k must be in [1, n]");

  PlainKMeansResult res;
  res.centers = gather_rows(x, opt.init_indices);
  for (std::size_t it = 1; it <= opt.max_iters; ++it) {
    res.labels = nearest_centers(x, res.centers, &res.min_margin);
    std::vector<std::size_t> counts(opt.k, 0);
    Matrix sums(opt.k, d);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = res.labels[i];
      ++counts[j];
      for (std::size_t c = 0; c < d; ++c) sums(j, c) += x(i, c);
    }
    Matrix next(opt.k, d);
    for (std::size_t j = 0; j < opt.k; ++j) {
      if (counts[j] == 0) {
        const auto src = opt.empty_policy == EmptyClusterPolicy::kReseed
                             ? x.row(reseed_index(opt.reseed_seed, it, j, n))
                             : res.centers.row(j);
        std::ranges::copy(src, next.row(j).begin());
        continue;
      }
      for (std::size_t c = 0; c < d; ++c) {
        next(j, c) = sums(j, c) / static_cast<double>(counts[j]);
      }
    }
    double delta = 0.0;
    for (std::size_t j = 0; j < opt.k; ++j) delta += squared_distance(res.centers.row(j), next.row(j));
    res.centers = std::move(next);
    res.iterations = it;
    res.label_history.push_back(res.labels);
    res.t_history.push_back(counts);
    res.inertia.push_back(inertia(x, res.centers, res.labels));
    res.movement.push_back(delta);
    if (delta <= opt.epsilon) {
      res.converged = true;
      break;
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Partitioning

enum class PartitionMode { kHorizontal, kVertical };

inline std::string_view to_string(PartitionMode m) {
  return m == PartitionMode::kHorizontal ? "horizontal" : "vertical";
}

struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

// Party j (0-based here) owns rows (horizontal) or columns (vertical)
// ranges[j].
struct PartitionSpec {
  PartitionMode mode = PartitionMode::kHorizontal;
  std::vector<IndexRange> ranges;

  std::size_t parties() const { return ranges.size(); }

  static PartitionSpec from_sizes(PartitionMode mode, std::span<const std::size_t> sizes) {
    PartitionSpec spec{mode, {}};
    std::size_t at = 0;
    for (std::size_t s : sizes) {
      spec.ranges.push_back({at, at + s});
      at += s;
    }
    return spec;
  }

  // "horizontal:200,200" or "vertical:1,1".
  static PartitionSpec parse(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) {
      throw DataError("partition spec '" + std::string(text) +
                      "': expected <horizontal|vertical>:<n1>,<n2>,...");
    }
    const std::string_view head = text.substr(0, colon);
    PartitionMode mode;
    if (head == "horizontal") {
      mode = PartitionMode::kHorizontal;
    } else if (head == "vertical") {
      mode = PartitionMode::kVertical;
    } else {
      throw DataError("partition spec: unknown mode '" + std::string(head) + "'");
    }
    std::vector<std::size_t> sizes;
    std::string_view rest = text.substr(colon + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      const std::string_view tok = rest.substr(0, comma);
      std::size_t v = 0;
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size() || v == 0) {
        throw DataError("partition spec: bad size '" + std::string(tok) + "'");
      }
      sizes.push_back(v);
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    if (sizes.empty()) throw DataError("partition spec: no party sizes");
    return from_sizes(mode, sizes);
  }

  std::string str() const {
    std::string s(to_string(mode));
    s += ':';
    for (std::size_t j = 0; j < ranges.size(); ++j) {
      if (j) s += ',';
      s += std::to_string(ranges[j].size());
    }
    return s;
  }

  // Ranges must tile [0, extent) without overlap; party order is free.
  void validate(std::size_t extent) const {
    if (ranges.empty()) throw DataError("partition spec: no parties");
    std::vector<IndexRange> sorted = ranges;
    std::ranges::sort(sorted, {}, &IndexRange::begin);
    std::size_t at = 0;
    for (const auto& r : sorted) {
      if (r.end <= r.begin) throw DataError("partition spec: empty range");
      if (r.begin < at) throw DataError("partition spec: overlapping ranges");
      if (r.begin > at) throw DataError("partition spec: ranges leave a gap");
      at = r.end;
    }
    if (at != extent) {
      throw DataError("partition spec covers " + std::to_string(at) + " of " +
                      std::to_string(extent) + " " +
                      (mode == PartitionMode::kHorizontal ? "rows" : "columns"));
    }
  }
};

inline std::vector<Matrix> split(const Matrix& x, const PartitionSpec& spec) {
  const bool rows = spec.mode == PartitionMode::kHorizontal;
  spec.validate(rows ? x.rows() : x.cols());
  std::vector<Matrix> parts;
  for (const auto& r : spec.ranges) {
    Matrix part(rows ? r.size() : x.rows(), rows ? x.cols() : r.size());
    for (std::size_t i = 0; i < part.rows(); ++i) {
      for (std::size_t c = 0; c < part.cols(); ++c) {
        part(i, c) = rows ? x(r.begin + i, c) : x(i, r.begin + c);
      }
    }
    parts.push_back(std::move(part));
  }
  return parts;
}

inline Matrix reassemble(std::span<const Matrix> parts, const PartitionSpec& spec) {
  if (parts.size() != spec.parties()) throw DataError("reassemble: party count mismatch");
  const bool rows = spec.mode == PartitionMode::kHorizontal;
  std::size_t extent = 0, other = parts.empty() ? 0 : (rows ? parts[0].cols() : parts[0].rows());
  for (std::size_t j = 0; j < parts.size(); ++j) {
    const std::size_t own = rows ? parts[j].rows() : parts[j].cols();
    const std::size_t cross = rows ? parts[j].cols() : parts[j].rows();
    if (own != spec.ranges[j].size() || cross != other) {
      throw DataError("reassemble: fragment " + std::to_string(j) + " has the wrong shape");
    }
    extent += own;
  }
  spec.validate(extent);
  Matrix x(rows ? extent : other, rows ? other : extent);
  for (std::size_t j = 0; j < parts.size(); ++j) {
    const auto& r = spec.ranges[j];
    for (std::size_t i = 0; i < parts[j].rows(); ++i) {
      for (std::size_t c = 0; c < parts[j].cols(); ++c) {
        (rows ? x(r.begin + i, c) : x(i, r.begin + c)) = parts[j](i, c);
      }
    }
  }
  return x;
}

// ---------------------------------------------------------------------------
// Label comparison

inline double label_agreement(std::span<const std::size_t> a,
                              std::span<const std::size_t> b) {
  if (a.size() != b.size()) throw DataError("label_agreement: length mismatch");
  if (a.empty()) return 1.0;
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == b[i];
  return static_cast<double>(same) / static_cast<double>(a.size());
}

// Agreement after the best relabeling of `a` onto `b` (k <= 9).
inline double best_permutation_agreement(std::span<const std::size_t> a,
                                         std::span<const std::size_t> b) {
  if (a.size() != b.size()) throw DataError("best_permutation_agreement: length mismatch");
  if (a.empty()) return 1.0;
  const std::size_t k = std::max(*std::ranges::max_element(a), *std::ranges::max_element(b)) + 1;
  if (k > 9) throw DataError("best_permutation_agreement: too many labels");
  std::vector<std::size_t> confusion(k * k, 0);
  for (std::size_t i = 0; i < a.size(); ++i) ++confusion[a[i] * k + b[i]];
  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  std::size_t best = 0;
  do {
    std::size_t hit = 0;
    for (std::size_t j = 0; j < k; ++j) hit += confusion[j * k + perm[j]];
    best = std::max(best, hit);
  } while (std::ranges::next_permutation(perm).found);
  return static_cast<double>(best) / static_cast<double>(a.size());
}

}  // namespace ppkm
