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

#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "ppkm/baseline.hpp"

namespace ppkm {
namespace {

TEST(GaussianMixture, ComponentStatistics) {
  const PlainDataset data = gen_gaussian_mixture(7);
  ASSERT_EQ(data.size(), 400u);
  ASSERT_EQ(data.dims(), 2u);
  const auto comps = default_components();
  for (std::size_t c = 0; c < comps.size(); ++c) {
    double mean[2] = {0, 0}, sq[2] = {0, 0};
    for (std::size_t i = 100 * c; i < 100 * (c + 1); ++i) {
      EXPECT_EQ((*data.labels)[i], c);
      for (int a = 0; a < 2; ++a) {
        mean[a] += data.points(i, a) / 100;
        sq[a] += data.points(i, a) * data.points(i, a) / 100;
      }
    }
    for (int a = 0; a < 2; ++a) {
      EXPECT_NEAR(mean[a], comps[c].mean[a], 0.3);
      const double sd = std::sqrt((sq[a] - mean[a] * mean[a]) * 100 / 99);
      EXPECT_GE(sd, 0.8);
      EXPECT_LE(sd, 1.2);
    }
  }
}

TEST(GaussianMixture, DeterministicPerSeed) {
  EXPECT_EQ(gen_gaussian_mixture(5).points.values()[17], gen_gaussian_mixture(5).points.values()[17]);
  EXPECT_NE(gen_gaussian_mixture(5).points.values()[17], gen_gaussian_mixture(6).points.values()[17]);
}

TEST(GaussianMixture, OddDimensionAndErrors) {
  const std::vector<GaussianComponent> comps = {{{0, 0, 0}, 0.0, 3}, {{1, 2, 3}, 0.0, 2}};
  const PlainDataset d = gen_gaussian_mixture(1, comps);
  EXPECT_EQ(d.points, (Matrix{{0, 0, 0}, {0, 0, 0}, {0, 0, 0}, {1, 2, 3}, {1, 2, 3}}));
  const std::vector<GaussianComponent> ragged = {{{0, 0}, 1, 1}, {{0}, 1, 1}};
  EXPECT_THROW(gen_gaussian_mixture(1, ragged), DataError);
  EXPECT_THROW(gen_gaussian_mixture(1, std::vector<GaussianComponent>{}), DataError);
}

TEST(InitIndices, DistinctAndValidated) {
  Rng rng(3);
  auto idx = draw_init_indices(rng, 10, 10);
  std::ranges::sort(idx);
  std::vector<std::size_t> all(10);
  std::iota(all.begin(), all.end(), 0);
  EXPECT_EQ(idx, all);
  EXPECT_THROW(draw_init_indices(rng, 3, 4), DataError);
  EXPECT_THROW(draw_init_indices(rng, 3, 0), DataError);
}

TEST(PlainKMeans, EveryPointItsOwnCluster) {
  const Matrix x{{0, 0}, {1, 0}, {5, 5}};
  PlainKMeansOptions opt;
  opt.k = 3;
  opt.init_indices = {2, 0, 1};
  const PlainKMeansResult r = plain_kmeans(x, opt);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 1u);
  EXPECT_EQ(r.labels, (std::vector<std::size_t>{1, 2, 0}));
  EXPECT_EQ(r.inertia.back(), 0.0);
}

TEST(PlainKMeans, RecoversMixtureCenters) {
  const PlainDataset data = gen_gaussian_mixture(7);
  PlainKMeansOptions opt;
  opt.k = 4;
  opt.init_indices = {10, 110, 210, 310};
  const PlainKMeansResult r = plain_kmeans(data.points, opt);
  ASSERT_TRUE(r.converged);
  const auto comps = default_components();
  for (std::size_t c = 0; c < 4; ++c) {
    EXPECT_NEAR(r.centers(c, 0), comps[c].mean[0], 0.5);
    EXPECT_NEAR(r.centers(c, 1), comps[c].mean[1], 0.5);
  }
  EXPECT_EQ(best_permutation_agreement(r.labels, *data.labels), 1.0);
  EXPECT_GT(r.min_margin, 0.0);
}

TEST(PlainKMeans, StopsAtEpsilonOrCap) {
  const PlainDataset data = gen_gaussian_mixture(8);
  PlainKMeansOptions opt;
  opt.k = 4;
  opt.init_indices = {0, 1, 2, 3};
  opt.max_iters = 2;
  const PlainKMeansResult capped = plain_kmeans(data.points, opt);
  EXPECT_EQ(capped.iterations, 2u);
  EXPECT_FALSE(capped.converged);
  opt.max_iters = 100;
  const PlainKMeansResult full = plain_kmeans(data.points, opt);
  EXPECT_TRUE(full.converged);
  EXPECT_LE(full.movement.back(), opt.epsilon);
  for (std::size_t i = 0; i + 1 < full.movement.size(); ++i) EXPECT_GT(full.movement[i], opt.epsilon);
}

TEST(PlainKMeans, EmptyClusterPolicies) {
  // Centers 1 and 2 coincide; ties go to center 1, so center 2 loses every
  // point.
  const Matrix y{{0, 0}, {0.1, 0}, {10, 10}, {10, 10}};
  PlainKMeansOptions opt;
  opt.k = 3;
  opt.init_indices = {0, 2, 3};
  opt.max_iters = 1;
  const PlainKMeansResult keep = plain_kmeans(y, opt);
  EXPECT_EQ(keep.t_history[0], (std::vector<std::size_t>{2, 2, 0}));
  EXPECT_EQ(keep.centers(2, 0), 10.0);
  opt.empty_policy = EmptyClusterPolicy::kReseed;
  opt.reseed_seed = 4;
  const PlainKMeansResult reseed = plain_kmeans(y, opt);
  const std::size_t row = reseed_index(4, 1, 2, y.rows());
  EXPECT_EQ(reseed.centers(2, 0), y(row, 0));
  EXPECT_EQ(reseed.centers(2, 1), y(row, 1));
}

TEST(PlainKMeans, RejectsBadInit) {
  const Matrix x{{0, 0}, {1, 1}};
  PlainKMeansOptions opt;
  opt.k = 2;
  opt.init_indices = {0};
  EXPECT_THROW(plain_kmeans(x, opt), DataError);
  opt.init_indices = {0, 2};
  EXPECT_THROW(plain_kmeans(x, opt), DataError);
}

TEST(Partition, ParseAndFormat) {
  const PartitionSpec h = PartitionSpec::parse("horizontal:200,200");
  EXPECT_EQ(h.mode, PartitionMode::kHorizontal);
  EXPECT_EQ(h.ranges, (std::vector<IndexRange>{{0, 200}, {200, 400}}));
  EXPECT_EQ(h.str(), "horizontal:200,200");
  const PartitionSpec v = PartitionSpec::parse("vertical:1,2,1");
  EXPECT_EQ(v.ranges[1], (IndexRange{1, 3}));
  for (const char* bad : {"horizontal", "diagonal:1,1", "vertical:", "vertical:1,,1",
                          "vertical:0,2", "vertical:1,x"}) {
    EXPECT_THROW(PartitionSpec::parse(bad), DataError) << bad;
  }
}

TEST(Partition, SplitAndReassemble) {
  const Matrix x{{1, 2, 3}, {4, 5, 6}, {7, 8, 9}, {10, 11, 12}};
  const PartitionSpec rows = PartitionSpec::parse("horizontal:1,3");
  const auto rp = split(x, rows);
  EXPECT_EQ(rp[0], (Matrix{{1, 2, 3}}));
  EXPECT_EQ(rp[1].rows(), 3u);
  EXPECT_EQ(reassemble(rp, rows), x);

  const PartitionSpec cols = PartitionSpec::parse("vertical:2,1");
  const auto cp = split(x, cols);
  EXPECT_EQ(cp[1], (Matrix{{3}, {6}, {9}, {12}}));
  EXPECT_EQ(reassemble(cp, cols), x);

  EXPECT_THROW(split(x, PartitionSpec::parse("horizontal:2,3")), DataError);
  EXPECT_THROW(split(x, PartitionSpec::parse("vertical:1,1")), DataError);
  PartitionSpec overlap{PartitionMode::kHorizontal, {{0, 3}, {2, 4}}};
  EXPECT_THROW(split(x, overlap), DataError);
  const Matrix wrong(2, 3);
  const Matrix parts[] = {wrong, rp[1]};
  EXPECT_THROW(reassemble(parts, rows), DataError);
}

TEST(Agreement, PlainAndPermuted) {
  const std::vector<std::size_t> a = {0, 0, 1, 1, 2};
  const std::vector<std::size_t> b = {1, 1, 0, 0, 2};
  EXPECT_DOUBLE_EQ(label_agreement(a, b), 0.2);
  EXPECT_DOUBLE_EQ(best_permutation_agreement(a, b), 1.0);
  EXPECT_DOUBLE_EQ(label_agreement({}, {}), 1.0);
  const std::vector<std::size_t> shorter = {0};
  EXPECT_THROW(label_agreement(a, shorter), DataError);
}

TEST(NearestCenters, EarliestIndexOnTies) {
  const Matrix x{{0, 0}, {2, 0}};
  const Matrix c{{1, 0}, {-1, 0}, {3, 0}};
  double margin = 1e9;
  EXPECT_EQ(nearest_centers(x, c, &margin), (std::vector<std::size_t>{0, 0}));
  EXPECT_EQ(margin, 0.0);
}

}  // namespace
}  // namespace ppkm
