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

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ppkm/baseline.hpp"
#include "ppkm/primitives.hpp"

// Secure k-means protocols as per-party programs. Each function is called by
// every party of a session (dealer included) with that party's view of the
// inputs; see session.hpp for harness wrappers that run whole sessions.

namespace ppkm {

enum class DivisionMode { kFast, kSecure };

inline std::string_view to_string(DivisionMode m) {
  return m == DivisionMode::kFast ? "fast" : "secure";
}

namespace scope_names {
inline constexpr std::string_view kMatDist = "MatDist";
inline constexpr std::string_view kLabelSamples = "LabelSamples";
inline constexpr std::string_view kShkMeans = "SHK-means";
inline constexpr std::string_view kSvkMeans = "SVK-means";
inline constexpr std::string_view kZeroShares = "ZeroShares";
}  // namespace scope_names

namespace tags {
inline constexpr std::string_view kRevealT = "reveal.t";
inline constexpr std::string_view kRevealLabels = "reveal.labels";
inline constexpr std::string_view kZeroU = "zero.u";
}  // namespace tags

// Squared Euclidean distances M[i][j] = |X[i] - C[j]|^2 at twice the input
// scale (no truncation). Two rounds.
inline LocalShare mat_dist(Party& ctx, const LocalShare& x, const LocalShare& c) {
  ctx.check_owned(x);
  ctx.check_owned(c);
  if (x.shape().size() != 2 || c.shape().size() != 2 || x.shape()[1] != c.shape()[1]) {
    throw ShapeError("mat_dist: X " + to_string(x.shape()) + " vs C " + to_string(c.shape()));
  }
  require_same_scale(x, c, "mat_dist");
  auto scope = ctx.scope(std::string(scope_names::kMatDist));
  const std::size_t n = x.shape()[0], k = c.shape()[0], d = x.shape()[1];

  const RingTensor& xv = x.view();
  const RingTensor& cv = c.view();
  RingTensor diff({n, k, d});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t a = 0; a < d; ++a) diff[(i * k + j) * d + a] = xv.at(i, a) - cv.at(j, a);
    }
  }
  const LocalShare delta = x.derive(std::move(diff), x.frac_bits());
  const LocalShare sq = multiply_exact(ctx, delta, delta);

  RingTensor m({n, k});
  const RingTensor& sv = sq.view();
  for (std::size_t e = 0; e < n * k; ++e) {
    RingValue s = 0;
    for (std::size_t a = 0; a < d; ++a) s += sv[e * d + a];
    m[e] = s;
  }
  return sq.derive(std::move(m), sq.frac_bits());
}

// One-hot H from a distance matrix: all k*n*k differences M[i][l] - M[i][j]
// go through a single comparison batch, then the k bit planes are
// multiplied together in sequence.
inline LocalShare labels_from_distances(Party& ctx, const LocalShare& m) {
  const std::size_t n = m.shape()[0], k = m.shape()[1];
  const RingTensor& mv = m.view();
  RingTensor g({k * n * k});
  for (std::size_t l = 0; l < k; ++l) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < k; ++j) g[(l * n + i) * k + j] = mv.at(i, l) - mv.at(i, j);
    }
  }
  const LocalShare planes = drelu(ctx, m.derive(std::move(g), m.frac_bits()));
  LocalShare h = slice_flat(planes, 0, {n, k});
  for (std::size_t l = 1; l < k; ++l) {
    h = element_wise_mat_mul(ctx, h, slice_flat(planes, l * n * k, {n, k}));
  }
  return h;
}

// Shared n x k one-hot matrix of nearest centers. 2k + 8 rounds.
inline LocalShare label_samples(Party& ctx, const LocalShare& x, const LocalShare& c) {
  auto scope = ctx.scope(std::string(scope_names::kLabelSamples));
  if (c.shape().size() != 2 || c.shape()[0] == 0) {
    throw ShapeError("label_samples: need at least one center");
  }
  return labels_from_distances(ctx, mat_dist(ctx, x, c));
}

// Index of the first set entry of each row of a revealed 0/1 matrix.
inline std::vector<std::size_t> one_hot_to_labels(const RingTensor& h) {
  std::vector<std::size_t> labels(h.rows(), 0);
  for (std::size_t i = 0; i < h.rows(); ++i) {
    for (std::size_t j = 0; j < h.cols(); ++j) {
      if (h.at(i, j) != 0) {
        labels[i] = j;
        break;
      }
    }
  }
  return labels;
}

// ---------------------------------------------------------------------------
// Horizontal (shared data) training

struct KMeansOptions {
  std::size_t k = 4;
  double epsilon = 1e-4;
  DivisionMode division = DivisionMode::kFast;
  std::size_t max_iters = 100;
  EmptyClusterPolicy empty_policy = EmptyClusterPolicy::kKeep;
  std::uint64_t reseed_seed = 0;
  // Empty: drawn from the session's public stream.
  std::vector<std::size_t> init_indices;
  // Keeps each party's share of H per iteration (SHK) for offline audits.
  bool record_labels = false;

  void validate(std::size_t n) const {
    if (k == 0 || k > n) {
      throw ConfigError("k must be in [1, n]; got k=" + std::to_string(k) +
                        ", n=" + std::to_string(n));
    }
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    if (max_iters == 0) throw ConfigError("max_iters must be at least 1");
    if (!init_indices.empty()) {
      if (init_indices.size() != k) throw ConfigError("init_indices must list k rows");
      std::vector<std::size_t> seen = init_indices;
      std::ranges::sort(seen);
      if (std::ranges::adjacent_find(seen) != seen.end() || seen.back() >= n) {
        throw ConfigError("init_indices must be distinct rows in [0, n)");
      }
    }
  }
};

struct ShkPartyResult {
  LocalShare centers;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<std::vector<std::uint64_t>> t_history;  // fast division only
  std::vector<std::uint64_t> rounds_per_iteration;
  std::vector<LocalShare> label_history;
  std::vector<std::size_t> init_indices;
};

namespace detail {

inline std::vector<std::size_t> resolve_init(Party& ctx, const KMeansOptions& opt,
                                             std::size_t n) {
  if (!opt.init_indices.empty()) return opt.init_indices;
  return draw_init_indices(ctx.public_rng(), n, opt.k);
}

inline std::vector<std::size_t> reseed_rows(const KMeansOptions& opt, std::size_t it,
                                            std::size_t n) {
  std::vector<std::size_t> rows(opt.k);
  for (std::size_t j = 0; j < opt.k; ++j) rows[j] = reseed_index(opt.reseed_seed, it, j, n);
  return rows;
}

// Fast center update: per-cluster counts are public, so each holder of the
// two-party sums divides locally; empty clusters take the fallback row.
inline LocalShare divide_by_counts(const Party& ctx, const TwoPartyProduct& sums,
                                   const RingTensor& counts, const LocalShare& fallback) {
  if (ctx.is_dealer()) return sums.value;
  const int me = ctx.id().value();
  const RingTensor& s = sums.value.tensor();
  const RingTensor& fb = fallback.tensor();
  RingTensor out(s.shape());
  for (std::size_t j = 0; j < s.rows(); ++j) {
    for (std::size_t c = 0; c < s.cols(); ++c) {
      if (counts[j] == 0) {
        out.at(j, c) = fb.at(j, c);
      } else if (me <= 2) {
        out.at(j, c) = divide_share(s.at(j, c), counts[j], me == 1);
      }
    }
  }
  return sums.value.derive(std::move(out), sums.value.frac_bits()) + sums.rerandomizer;
}

inline LocalShare column_sums(const LocalShare& h) {
  const RingTensor& v = h.view();
  RingTensor t({v.cols()});
  for (std::size_t i = 0; i < v.rows(); ++i) {
    for (std::size_t j = 0; j < v.cols(); ++j) t[j] += v.at(i, j);
  }
  return h.derive(std::move(t), h.frac_bits());
}

// Total squared movement between two center sets, at twice their scale.
// Batched into one product so the whole distance takes two rounds.
inline LocalShare center_movement(Party& ctx, const LocalShare& c, const LocalShare& next) {
  auto scope = ctx.scope(std::string(scope_names::kMatDist));
  const LocalShare diff = c - next;
  const LocalShare sq = multiply_exact(ctx, diff, diff);
  RingValue total = 0;
  for (RingValue v : sq.view().values()) total += v;
  return sq.derive(RingTensor({1}, {total}), sq.frac_bits());
}

inline bool stop_bit(Party& ctx, const LocalShare& delta, double epsilon) {
  const RingValue eps = FixedCodec::encode_scaled(epsilon, delta.frac_bits());
  const RingTensor s = drelu_public(ctx, add_public_scalar(-delta, eps));
  return s[0] == 1;
}

}  // namespace detail

// Horizontal training over a shared n x d data matrix at the codec scale.
// Per iteration: 2k + 20 rounds (fast division) or 2k + 150 (secure).
inline ShkPartyResult shk_means(Party& ctx, const LocalShare& x, const KMeansOptions& opt) {
  ctx.check_owned(x);
  if (x.shape().size() != 2) throw ShapeError("shk_means: X must be n x d");
  const int f = ctx.params().codec.frac_bits();
  if (x.frac_bits() != f) throw ShapeError("shk_means: X must be at the codec scale");
  const std::size_t n = x.shape()[0];
  opt.validate(n);

  ShkPartyResult res;
  res.init_indices = detail::resolve_init(ctx, opt, n);
  auto scope = ctx.scope(std::string(scope_names::kShkMeans));
  LocalShare c = gather_rows(x, res.init_indices);

  for (std::size_t it = 1; it <= opt.max_iters; ++it) {
    const std::uint64_t start = ctx.rounds();
    const LocalShare h = label_samples(ctx, x, c);
    if (opt.record_labels) res.label_history.push_back(h);
    const LocalShare t = detail::column_sums(h);
    const LocalShare fallback = opt.empty_policy == EmptyClusterPolicy::kReseed
                                    ? gather_rows(x, detail::reseed_rows(opt, it, n))
                                    : c;

    LocalShare next;
    if (opt.division == DivisionMode::kFast) {
      // The counts travel with the first round of the product.
      post_reveal(ctx, t, tags::kRevealT);
      const TwoPartyProduct sums =
          multiply_two_party(ctx, transpose(h), x, ProductKind::kMatrix);
      const RingTensor counts = collect_reveal(ctx, t, tags::kRevealT);
      if (!ctx.is_dealer()) {
        res.t_history.emplace_back(counts.values().begin(), counts.values().end());
      }
      next = detail::divide_by_counts(ctx, sums, counts, fallback);
    } else {
      const LocalShare sums = mat_mul(ctx, transpose(h), x);
      RingTensor den(sums.shape());
      const RingTensor& tv = t.view();
      for (std::size_t j = 0; j < den.rows(); ++j) {
        for (std::size_t a = 0; a < den.cols(); ++a) den.at(j, a) = tv[j];
      }
      next = secure_divide(ctx, sums, t.derive(std::move(den), 0), &fallback);
    }

    const LocalShare delta = detail::center_movement(ctx, c, next);
    const bool stop = detail::stop_bit(ctx, delta, opt.epsilon);
    c = next;
    res.iterations = it;
    res.rounds_per_iteration.push_back(ctx.rounds() - start);
    if (stop) {
      res.converged = true;
      break;
    }
  }
  res.centers = std::move(c);
  return res;
}

// Shared one-hot labels of new shared samples under shared centers.
inline LocalShare shk_predict_shared(Party& ctx, const LocalShare& y, const LocalShare& c) {
  return label_samples(ctx, y, c);
}

// Labels revealed to the data parties (0-based; the dealer gets none).
inline std::vector<std::size_t> shk_predict(Party& ctx, const LocalShare& y,
                                            const LocalShare& c) {
  const LocalShare h = shk_predict_shared(ctx, y, c);
  const RingTensor opened = reveal(ctx, h, tags::kRevealLabels);
  if (ctx.is_dealer()) return {};
  return one_hot_to_labels(opened);
}

// ---------------------------------------------------------------------------
// Vertical (column-partitioned) training

// Each data party passes its own column block (n x d_p, plaintext); the
// dealer passes an empty matrix. Everyone passes the public row count n.
struct SvkPartyResult {
  Matrix centers;  // k x d_p: this party's center columns
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<std::size_t> labels;
  std::vector<std::vector<std::size_t>> label_history;
  std::vector<std::vector<std::uint64_t>> t_history;
  std::vector<std::uint64_t> rounds_per_iteration;
  std::vector<std::size_t> init_indices;
};

namespace detail {

inline void check_columns(const Party& ctx, const Matrix& cols, std::size_t n) {
  if (!ctx.is_dealer() && cols.rows() != n) {
    throw DataError(to_string(ctx.id()) + " holds " + std::to_string(cols.rows()) +
                    " rows, session expects " + std::to_string(n));
  }
}

// Dealer delivers fresh zero shares (n x k) to the data parties.
inline void post_zero_shares(Party& ctx, const Shape& shape) {
  if (!ctx.is_dealer()) return;
  const SharedMatrix u = zero_shares(shape, ctx.num_data_parties(), ctx.rng());
  for (PartyId j : ctx.data_parties()) ctx.send(j, tags::kZeroU, u.share(j));
}

inline RingTensor collect_zero_shares(Party& ctx, const Shape& shape) {
  if (ctx.is_dealer()) return RingTensor(shape);
  RingTensor u = ctx.recv(kDealer, tags::kZeroU);
  u.require_same_shape(RingTensor(shape), "zero shares");
  return u;
}

inline RingTensor fetch_zero_shares(Party& ctx, const Shape& shape) {
  auto scope = ctx.scope(std::string(scope_names::kZeroShares));
  post_zero_shares(ctx, shape);
  ctx.barrier();
  return collect_zero_shares(ctx, shape);
}

// Masked local distance shares D_p = u_p + sum over own columns of
// (X_p[i] - C_p[j])^2, encoded at scale 2f.
inline LocalShare local_distances(const Party& ctx, const Matrix& cols,
                                  const Matrix& centers, const RingTensor& u,
                                  std::size_t n, std::size_t k) {
  const int scale = 2 * ctx.params().codec.frac_bits();
  if (ctx.is_dealer()) return LocalShare::shape_only(ctx.id(), {n, k}, scale);
  RingTensor d({n, k});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      d.at(i, j) = FixedCodec::encode_scaled(squared_distance(cols.row(i), centers.row(j)),
                                            scale) + u.at(i, j);
    }
  }
  return LocalShare(ctx.id(), std::move(d), scale);
}

}  // namespace detail

// Per iteration: 9k rounds (k - 1 compare-and-select steps, the label
// opening, and the stopping comparison). One extra setup round delivers the
// first zero shares; later ones ride in the stopping comparison.
inline SvkPartyResult svk_means(Party& ctx, const Matrix& cols, std::size_t n,
                                const KMeansOptions& opt) {
  detail::check_columns(ctx, cols, n);
  opt.validate(n);
  const std::size_t k = opt.k;
  const int scale = 2 * ctx.params().codec.frac_bits();
  const Shape dist_shape{n, k};

  SvkPartyResult res;
  res.init_indices = detail::resolve_init(ctx, opt, n);
  auto scope = ctx.scope(std::string(scope_names::kSvkMeans));
  Matrix c = ctx.is_dealer() ? Matrix() : gather_rows(cols, res.init_indices);
  RingTensor u = detail::fetch_zero_shares(ctx, dist_shape);

  for (std::size_t it = 1; it <= opt.max_iters; ++it) {
    const std::uint64_t start = ctx.rounds();
    const LocalShare d = detail::local_distances(ctx, cols, c, u, n, k);
    const std::vector<std::size_t> labels = argmin(ctx, d, tags::kRevealLabels);

    LocalShare delta = LocalShare::shape_only(ctx.id(), {1}, scale);
    if (!ctx.is_dealer()) {
      std::vector<std::uint64_t> counts(k, 0);
      Matrix sums(k, cols.cols());
      for (std::size_t i = 0; i < n; ++i) {
        ++counts[labels[i]];
        for (std::size_t a = 0; a < cols.cols(); ++a) sums(labels[i], a) += cols(i, a);
      }
      Matrix next(k, cols.cols());
      for (std::size_t j = 0; j < k; ++j) {
        if (counts[j] == 0) {
          const auto src = opt.empty_policy == EmptyClusterPolicy::kReseed
                               ? cols.row(reseed_index(opt.reseed_seed, it, j, n))
                               : c.row(j);
          std::ranges::copy(src, next.row(j).begin());
          continue;
        }
        for (std::size_t a = 0; a < cols.cols(); ++a) {
          next(j, a) = sums(j, a) / static_cast<double>(counts[j]);
        }
      }
      double moved = 0.0;
      for (std::size_t j = 0; j < k; ++j) moved += squared_distance(c.row(j), next.row(j));
      delta = LocalShare(ctx.id(), RingTensor({1}, {FixedCodec::encode_scaled(moved, scale)}),
                         scale);
      c = std::move(next);
      res.labels = labels;
      res.label_history.push_back(labels);
      res.t_history.push_back(std::move(counts));
    }

    // Next iteration's zero shares travel in the comparison's first round.
    detail::post_zero_shares(ctx, dist_shape);
    const bool stop = detail::stop_bit(ctx, delta, opt.epsilon);
    u = detail::collect_zero_shares(ctx, dist_shape);
    res.iterations = it;
    res.rounds_per_iteration.push_back(ctx.rounds() - start);
    if (stop) {
      res.converged = true;
      break;
    }
  }
  res.centers = std::move(c);
  return res;
}

// Labels of new column-partitioned rows under a vertical model: one round for
// zero shares, then the compare-and-select chain and the label opening.
inline std::vector<std::size_t> svk_predict(Party& ctx, const Matrix& cols,
                                            const Matrix& centers, std::size_t m,
                                            std::size_t k) {
  detail::check_columns(ctx, cols, m);
  if (!ctx.is_dealer() && (centers.rows() != k || centers.cols() != cols.cols())) {
    throw DataError(to_string(ctx.id()) + ": new rows have " + std::to_string(cols.cols()) +
                    " columns, model block has " + std::to_string(centers.cols()));
  }
  auto scope = ctx.scope(std::string(scope_names::kSvkMeans));
  const RingTensor u = detail::fetch_zero_shares(ctx, {m, k});
  return argmin(ctx, detail::local_distances(ctx, cols, centers, u, m, k),
                tags::kRevealLabels);
}

}  // namespace ppkm
