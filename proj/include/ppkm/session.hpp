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
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "ppkm/kmeans.hpp"

// Whole-session helpers: run a protocol across all parties on the simulated
// network and collect the parts of the result that the parties would
// persist. Nothing here adds protocol messages beyond the per-party
// programs.

namespace ppkm {

enum class ClusterMode { kHorizontal, kVertical };

inline std::string_view to_string(ClusterMode m) {
  return m == ClusterMode::kHorizontal ? "horizontal" : "vertical";
}

struct ClusterModel {
  ClusterMode mode = ClusterMode::kHorizontal;
  std::size_t k = 0;
  std::size_t d = 0;
  double epsilon = 1e-4;
  int frac_bits = FixedCodec::kDefaultFracBits;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<std::vector<std::uint64_t>> t_history;
  std::vector<std::size_t> init_indices;
  // Horizontal: k x d shared centers.
  SharedMatrix centers;
  // Vertical: party j's own center columns (k x d_j) and their positions.
  std::vector<Matrix> center_blocks;
  std::vector<IndexRange> column_ranges;

  int parties() const {
    return mode == ClusterMode::kHorizontal ? centers.num_parties()
                                            : static_cast<int>(center_blocks.size());
  }

  // Plaintext centers; only meaningful when all parties agree to open them.
  Matrix open_centers() const {
    if (mode == ClusterMode::kHorizontal) return reconstruct(centers);
    Matrix out(k, d);
    for (std::size_t j = 0; j < center_blocks.size(); ++j) {
      for (std::size_t r = 0; r < k; ++r) {
        for (std::size_t a = 0; a < column_ranges[j].size(); ++a) {
          out(r, column_ranges[j].begin + a) = center_blocks[j](r, a);
        }
      }
    }
    return out;
  }
};

struct TrainingRun {
  ClusterModel model;
  NetStats stats;
  Transcript transcript;
  std::vector<std::uint64_t> rounds_per_iteration;
  // Per-iteration labels. SVK opens them as part of the protocol; for SHK
  // they are reconstructed offline from recorded shares (audit only).
  std::vector<std::vector<std::size_t>> label_history;
  std::vector<std::size_t> labels;
  std::uint64_t setup_rounds = 0;
};

inline constexpr std::string_view kInputSharingScope = "InputSharing";

// Every data party secret-shares its own rows (rows_per_party[j - 1] of
// them, possibly zero) with the others in one round; the result stacks the
// blocks in party order. The dealer gets a shape-only view.
inline LocalShare share_rows(Party& ctx, const Matrix& own,
                             std::span<const std::size_t> rows_per_party, std::size_t d) {
  if (rows_per_party.size() != static_cast<std::size_t>(ctx.num_data_parties())) {
    throw ConfigError("share_rows: one row count per data party required");
  }
  const int f = ctx.params().codec.frac_bits();
  const std::size_t n = std::accumulate(rows_per_party.begin(), rows_per_party.end(),
                                        std::size_t{0});
  auto scope = ctx.scope(std::string(kInputSharingScope));
  const int p = ctx.num_data_parties();
  RingTensor kept;
  if (!ctx.is_dealer()) {
    const std::size_t mine = rows_per_party[static_cast<std::size_t>(ctx.id().value() - 1)];
    if (own.rows() != mine || (mine > 0 && own.cols() != d)) {
      throw DataError(to_string(ctx.id()) + " input is " + std::to_string(own.rows()) + "x" +
                      std::to_string(own.cols()) + ", expected " + std::to_string(mine) +
                      "x" + std::to_string(d));
    }
    if (mine > 0) {
      auto parts = split_additive(encode(own, ctx.params().codec), p, ctx.rng());
      for (PartyId j : ctx.data_parties()) {
        if (j == ctx.id()) {
          kept = std::move(parts[static_cast<std::size_t>(j.value() - 1)]);
        } else {
          ctx.send(j, "input.share", parts[static_cast<std::size_t>(j.value() - 1)]);
        }
      }
    }
  }
  ctx.barrier();
  if (ctx.is_dealer()) return LocalShare::shape_only(ctx.id(), {n, d}, f);

  std::vector<RingValue> stacked;
  stacked.reserve(n * d);
  for (PartyId j : ctx.data_parties()) {
    if (rows_per_party[static_cast<std::size_t>(j.value() - 1)] == 0) continue;
    const RingTensor block = j == ctx.id() ? kept : ctx.recv(j, "input.share");
    stacked.insert(stacked.end(), block.raw().begin(), block.raw().end());
  }
  return LocalShare(ctx.id(), RingTensor({n, d}, std::move(stacked)), f);
}

namespace detail {

inline std::vector<std::size_t> row_counts(std::span<const Matrix> fragments) {
  std::vector<std::size_t> rows;
  for (const auto& m : fragments) rows.push_back(m.rows());
  return rows;
}

inline std::size_t common_cols(std::span<const Matrix> fragments) {
  std::size_t d = 0;
  for (const auto& m : fragments) {
    if (m.rows() == 0) continue;
    if (d != 0 && m.cols() != d) throw DataError("row fragments differ in column count");
    d = m.cols();
  }
  if (d == 0) throw DataError("no data rows");
  return d;
}

inline void check_party_count(const NetConfig& cfg, std::size_t fragments) {
  if (fragments != static_cast<std::size_t>(cfg.data_parties)) {
    throw ConfigError("expected one data fragment per data party (" +
                      std::to_string(cfg.data_parties) + "), got " +
                      std::to_string(fragments));
  }
}

}  // namespace detail

// Horizontal training: fragments[j] holds party j+1's rows.
inline TrainingRun run_shk_means(std::span<const Matrix> fragments, KMeansOptions opt,
                                 const NetConfig& cfg) {
  detail::check_party_count(cfg, fragments.size());
  const std::vector<std::size_t> rows = detail::row_counts(fragments);
  const std::size_t d = detail::common_cols(fragments);
  const std::size_t n = std::accumulate(rows.begin(), rows.end(), std::size_t{0});
  opt.validate(n);
  opt.record_labels = true;

  struct Out {
    ShkPartyResult result;
    std::uint64_t setup_rounds = 0;
  };
  auto run = run_protocol(cfg, [&](Party& ctx) {
    const Matrix empty;
    const Matrix& own =
        ctx.is_dealer() ? empty : fragments[static_cast<std::size_t>(ctx.id().value() - 1)];
    const LocalShare x = share_rows(ctx, own, rows, d);
    const std::uint64_t setup = ctx.rounds();
    return Out{shk_means(ctx, x, opt), setup};
  });

  TrainingRun tr;
  const ShkPartyResult& first = run.outputs[1].result;
  ClusterModel& m = tr.model;
  m.mode = ClusterMode::kHorizontal;
  m.k = opt.k;
  m.d = d;
  m.epsilon = opt.epsilon;
  m.frac_bits = cfg.params.codec.frac_bits();
  m.iterations = first.iterations;
  m.converged = first.converged;
  m.t_history = first.t_history;
  m.init_indices = first.init_indices;
  std::vector<LocalShare> views;
  for (const auto& o : run.outputs) views.push_back(o.result.centers);
  m.centers = SharedMatrix::assemble(views);

  for (std::size_t it = 0; it < first.label_history.size(); ++it) {
    std::vector<LocalShare> h;
    for (const auto& o : run.outputs) h.push_back(o.result.label_history[it]);
    tr.label_history.push_back(
        one_hot_to_labels(SharedMatrix::assemble(h).reconstruct_ring()));
  }
  if (!tr.label_history.empty()) tr.labels = tr.label_history.back();
  tr.rounds_per_iteration = first.rounds_per_iteration;
  tr.setup_rounds = run.outputs[1].setup_rounds;
  tr.stats = std::move(run.stats);
  tr.transcript = std::move(run.transcript);
  return tr;
}

// Vertical training: blocks[j] holds party j+1's columns for all n rows.
inline TrainingRun run_svk_means(std::span<const Matrix> blocks, const KMeansOptions& opt,
                                 const NetConfig& cfg) {
  detail::check_party_count(cfg, blocks.size());
  const std::size_t n = blocks.empty() ? 0 : blocks[0].rows();
  std::vector<IndexRange> ranges;
  std::size_t d = 0;
  for (const auto& b : blocks) {
    if (b.rows() != n) throw DataError("column blocks differ in row count");
    if (b.cols() == 0) throw DataError("every party must hold at least one column");
    ranges.push_back({d, d + b.cols()});
    d += b.cols();
  }
  opt.validate(n);

  auto run = run_protocol(cfg, [&](Party& ctx) {
    const Matrix empty;
    const Matrix& own =
        ctx.is_dealer() ? empty : blocks[static_cast<std::size_t>(ctx.id().value() - 1)];
    return svk_means(ctx, own, n, opt);
  });

  TrainingRun tr;
  const SvkPartyResult& first = run.outputs[1];
  ClusterModel& m = tr.model;
  m.mode = ClusterMode::kVertical;
  m.k = opt.k;
  m.d = d;
  m.epsilon = opt.epsilon;
  m.frac_bits = cfg.params.codec.frac_bits();
  m.iterations = first.iterations;
  m.converged = first.converged;
  m.t_history = first.t_history;
  m.init_indices = first.init_indices;
  m.column_ranges = ranges;
  for (std::size_t j = 1; j < run.outputs.size(); ++j) {
    m.center_blocks.push_back(run.outputs[j].centers);
  }
  tr.label_history = first.label_history;
  tr.labels = first.labels;
  tr.rounds_per_iteration = first.rounds_per_iteration;
  tr.setup_rounds = 1;
  tr.stats = std::move(run.stats);
  tr.transcript = std::move(run.transcript);
  return tr;
}

struct PredictionRun {
  std::vector<std::size_t> labels;
  NetStats stats;
};

// Horizontal prediction: fragments[j] are party j+1's new rows (any party may
// contribute none).
inline PredictionRun run_shk_predict(const ClusterModel& model,
                                     std::span<const Matrix> fragments,
                                     const NetConfig& cfg) {
  if (model.mode != ClusterMode::kHorizontal) throw ConfigError("model is not horizontal");
  detail::check_party_count(cfg, fragments.size());
  if (model.parties() != cfg.data_parties) {
    throw ConfigError("model was trained by " + std::to_string(model.parties()) +
                      " data parties");
  }
  const std::vector<std::size_t> rows = detail::row_counts(fragments);
  const std::size_t n = std::accumulate(rows.begin(), rows.end(), std::size_t{0});
  if (n == 0) return {};
  const std::size_t d = detail::common_cols(fragments);
  if (d != model.d) {
    throw DataError("new rows have " + std::to_string(d) + " columns, model has " +
                    std::to_string(model.d));
  }
  auto run = run_protocol(cfg, [&](Party& ctx) {
    const Matrix empty;
    const Matrix& own =
        ctx.is_dealer() ? empty : fragments[static_cast<std::size_t>(ctx.id().value() - 1)];
    const LocalShare y = share_rows(ctx, own, rows, d);
    return shk_predict(ctx, y, ctx.mine(model.centers));
  });
  return {std::move(run.outputs[1]), std::move(run.stats)};
}

// Vertical prediction: blocks[j] are party j+1's columns of the new rows.
inline PredictionRun run_svk_predict(const ClusterModel& model,
                                     std::span<const Matrix> blocks, const NetConfig& cfg) {
  if (model.mode != ClusterMode::kVertical) throw ConfigError("model is not vertical");
  detail::check_party_count(cfg, blocks.size());
  if (model.parties() != cfg.data_parties) {
    throw ConfigError("model was trained by " + std::to_string(model.parties()) +
                      " data parties");
  }
  const std::size_t m = blocks.empty() ? 0 : blocks[0].rows();
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    if (blocks[j].rows() != m) throw DataError("column blocks differ in row count");
    if (blocks[j].cols() != model.column_ranges[j].size()) {
      throw DataError("party " + std::to_string(j + 1) + " block has " +
                      std::to_string(blocks[j].cols()) + " columns, model expects " +
                      std::to_string(model.column_ranges[j].size()));
    }
  }
  if (m == 0) return {};
  auto run = run_protocol(cfg, [&](Party& ctx) {
    const Matrix empty;
    const std::size_t j = static_cast<std::size_t>(ctx.id().value());
    const Matrix& own = ctx.is_dealer() ? empty : blocks[j - 1];
    const Matrix& centers = ctx.is_dealer() ? empty : model.center_blocks[j - 1];
    return svk_predict(ctx, own, centers, m, model.k);
  });
  return {std::move(run.outputs[1]), std::move(run.stats)};
}

}  // namespace ppkm
