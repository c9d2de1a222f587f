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

#include <cstdint>
#include <vector>

#include "ppkm/session.hpp"

// Two-party illustration on the four-Gaussian dataset: what Alice concludes
// from her fragment alone versus what the secure protocol computes on the
// union of both fragments.

namespace ppkm {

struct DemoOptions {
  PartitionMode mode = PartitionMode::kHorizontal;
  std::uint64_t seed = 7;
  std::size_t k = 4;
  double epsilon = 1e-4;
  std::size_t max_iters = 100;
  DivisionMode division = DivisionMode::kFast;
  ProtocolParams params{};
};

struct DemoReport {
  PartitionMode mode = PartitionMode::kHorizontal;
  PlainDataset data;
  PartitionSpec spec;
  std::vector<std::size_t> ground_truth;  // all rows
  // Horizontal: Alice's model applied to Bob's rows. Vertical: Alice's 1-d
  // model applied to every row.
  std::vector<std::size_t> alice_labels;
  Matrix alice_centers;
  std::vector<std::size_t> full_plain_labels;
  std::vector<std::size_t> secure_labels;
  Matrix full_centers;
  Matrix secure_centers;
  // Fraction of Bob's rows whose Alice-model cluster (matched to the
  // full-data cluster with the nearest center) differs from the full-data
  // cluster. Horizontal only.
  double alice_mislabel_rate = 0.0;
  // Best-relabeling agreement of Alice's labels with the ground truth.
  double alice_truth_agreement = 0.0;
  double secure_plain_agreement = 0.0;
  NetStats secure_stats;
};

inline DemoReport train_alice_test_bob_demo(const DemoOptions& opt) {
  DemoReport rep;
  rep.mode = opt.mode;
  rep.data = gen_gaussian_mixture(opt.seed);
  rep.ground_truth = *rep.data.labels;
  const Matrix& x = rep.data.points;
  const std::size_t n = x.rows();
  const bool horizontal = opt.mode == PartitionMode::kHorizontal;
  const std::vector<std::size_t> sizes =
      horizontal ? std::vector<std::size_t>{n / 2, n - n / 2} : std::vector<std::size_t>{1, 1};
  rep.spec = PartitionSpec::from_sizes(opt.mode, sizes);
  const std::vector<Matrix> parts = split(x, rep.spec);
  const Matrix& alice = parts[0];

  Rng init_rng(derive_seed(opt.seed, "demo-init"));
  PlainKMeansOptions alice_opt;
  alice_opt.k = opt.k;
  alice_opt.epsilon = opt.epsilon;
  alice_opt.max_iters = opt.max_iters;
  alice_opt.init_indices = draw_init_indices(init_rng, alice.rows(), opt.k);
  const PlainKMeansResult alice_fit = plain_kmeans(alice, alice_opt);
  rep.alice_centers = alice_fit.centers;

  PlainKMeansOptions full_opt = alice_opt;
  full_opt.init_indices = draw_init_indices(init_rng, n, opt.k);
  const PlainKMeansResult full_fit = plain_kmeans(x, full_opt);
  rep.full_plain_labels = full_fit.labels;
  rep.full_centers = full_fit.centers;

  if (horizontal) {
    const Matrix& bob = parts[1];
    rep.alice_labels = nearest_centers(bob, alice_fit.centers);
    const std::vector<std::size_t> full_on_bob(full_fit.labels.begin() + alice.rows(),
                                               full_fit.labels.end());
    // Each of Alice's clusters stands for the full-data cluster whose center
    // is nearest to hers.
    const std::vector<std::size_t> to_full =
        nearest_centers(alice_fit.centers, full_fit.centers);
    std::vector<std::size_t> translated;
    for (std::size_t l : rep.alice_labels) translated.push_back(to_full[l]);
    rep.alice_mislabel_rate = 1.0 - label_agreement(translated, full_on_bob);
    const std::vector<std::size_t> truth_bob(rep.ground_truth.begin() + alice.rows(),
                                             rep.ground_truth.end());
    rep.alice_truth_agreement = best_permutation_agreement(rep.alice_labels, truth_bob);
  } else {
    rep.alice_labels = alice_fit.labels;
    rep.alice_truth_agreement = best_permutation_agreement(rep.alice_labels, rep.ground_truth);
  }

  KMeansOptions secure_opt;
  secure_opt.k = opt.k;
  secure_opt.epsilon = opt.epsilon;
  secure_opt.max_iters = opt.max_iters;
  secure_opt.division = opt.division;
  secure_opt.init_indices = full_opt.init_indices;
  NetConfig cfg;
  cfg.data_parties = 2;
  cfg.seed = derive_seed(opt.seed, "demo-session");
  cfg.params = opt.params;
  TrainingRun run = horizontal ? run_shk_means(parts, secure_opt, cfg)
                               : run_svk_means(parts, secure_opt, cfg);
  rep.secure_labels = run.labels;
  rep.secure_centers = run.model.open_centers();
  rep.secure_plain_agreement = label_agreement(rep.secure_labels, rep.full_plain_labels);
  rep.secure_stats = std::move(run.stats);
  return rep;
}

}  // namespace ppkm
