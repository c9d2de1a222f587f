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

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "ppkm/io.hpp"
#include "test_util.hpp"

namespace ppkm {
namespace {

namespace fs = std::filesystem;

class IoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("ppkm_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  fs::path dir_;
};

TEST_F(IoTest, CsvRoundTripWithLabels) {
  const PlainDataset data = gen_gaussian_mixture(7);
  io::write_csv(dir_ / "data.csv", data.points, &*data.labels);
  const PlainDataset back = io::read_csv(dir_ / "data.csv");
  EXPECT_EQ(back.points, data.points);  // shortest round-trip formatting
  EXPECT_EQ(back.labels, data.labels);
}

TEST_F(IoTest, CsvWithoutLabels) {
  const PlainDataset d = io::read_csv(write("a.csv", "x1,x2,x3\r\n1,2,3\r\n\n-4.5,5e-3,6\n"));
  EXPECT_EQ(d.points, (Matrix{{1, 2, 3}, {-4.5, 0.005, 6}}));
  EXPECT_FALSE(d.labels.has_value());
}

TEST_F(IoTest, CsvEmptyInputs) {
  EXPECT_EQ(io::read_csv(write("e.csv", "")).size(), 0u);
  const PlainDataset header_only = io::read_csv(write("h.csv", "x1,x2\n"));
  EXPECT_EQ(header_only.size(), 0u);
  EXPECT_EQ(header_only.dims(), 2u);
}

TEST_F(IoTest, CsvRejectsMalformedRows) {
  for (const char* text : {"x1,x2\n1\n", "x1,x2\n1,2,3\n", "x1,x2\n1,2,\n", "x1,x2\n1,abc\n",
                           "x1,x2\n1,2x\n", "x1,label\n1,-1\n", "x1,label\n1,0.5\n", "label\n1\n",
                           "x1\nnan\n"}) {
    EXPECT_THROW(io::read_csv(write("bad.csv", text)), DataError) << text;
  }
  EXPECT_THROW(io::read_csv(dir_ / "missing.csv"), DataError);
}

TEST_F(IoTest, LabelsFile) {
  io::write_labels(dir_ / "l.csv", {2, 0, 1});
  std::ifstream in(dir_ / "l.csv");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_EQ(text, "label\n2\n0\n1\n");
}

TEST_F(IoTest, ShareFileRoundTrip) {
  Rng rng(1);
  const RingTensor t = RingTensor::random({3, 5}, rng);
  io::write_share_file(dir_ / "s.skm1", t, 13);
  EXPECT_EQ(fs::file_size(dir_ / "s.skm1"), 16u + 8 * 15);
  const io::ShareFile back = io::read_share_file(dir_ / "s.skm1");
  EXPECT_EQ(back.values, t);
  EXPECT_EQ(back.frac_bits, 13);

  fs::resize_file(dir_ / "s.skm1", 16 + 8 * 14);
  EXPECT_THROW(io::read_share_file(dir_ / "s.skm1"), DataError);
  EXPECT_THROW(io::read_share_file(write("x.skm1", "SKM2aaaaaaaaaaaa")), DataError);
  EXPECT_THROW(io::write_share_file(dir_ / "r.skm1", RingTensor({2}), 0), ShapeError);
}

TEST_F(IoTest, HorizontalModelRoundTrip) {
  const PlainDataset data = gen_gaussian_mixture(7);
  const std::size_t sizes[] = {200, 200};
  const auto frags = split(data.points, PartitionSpec::from_sizes(PartitionMode::kHorizontal, sizes));
  KMeansOptions opt;
  opt.k = 3;
  const TrainingRun run = run_shk_means(frags, opt, testing::config(2));
  io::save_model(dir_ / "model.json", run.model, false);
  EXPECT_TRUE(fs::exists(dir_ / "model.P1.skm1"));
  EXPECT_TRUE(fs::exists(dir_ / "model.P2.skm1"));
  const ClusterModel back = io::load_model(dir_ / "model.json");
  EXPECT_EQ(back.mode, ClusterMode::kHorizontal);
  EXPECT_EQ(back.k, 3u);
  EXPECT_EQ(back.centers.reconstruct_ring(), run.model.centers.reconstruct_ring());
  EXPECT_EQ(back.centers.share(PartyId(1)), run.model.centers.share(PartyId(1)));
  EXPECT_EQ(back.t_history, run.model.t_history);
  EXPECT_EQ(back.init_indices, run.model.init_indices);

  std::ifstream in(dir_ / "model.json");
  EXPECT_FALSE(nlohmann::json::parse(in).contains("centers"));
  io::save_model(dir_ / "open.json", run.model, true);
  std::ifstream in2(dir_ / "open.json");
  const auto j = nlohmann::json::parse(in2);
  EXPECT_EQ(io::matrix_from_json(j.at("centers")), run.model.open_centers());
}

TEST_F(IoTest, VerticalModelRoundTrip) {
  const PlainDataset data = gen_gaussian_mixture(7);
  const std::size_t sizes[] = {1, 1};
  const auto blocks = split(data.points, PartitionSpec::from_sizes(PartitionMode::kVertical, sizes));
  KMeansOptions opt;
  opt.k = 4;
  const TrainingRun run = run_svk_means(blocks, opt, testing::config(2));
  io::save_model(dir_ / "v.json", run.model, false);
  const ClusterModel back = io::load_model(dir_ / "v.json");
  EXPECT_EQ(back.mode, ClusterMode::kVertical);
  EXPECT_EQ(back.column_ranges, run.model.column_ranges);
  // Stored at the codec scale.
  EXPECT_LE(max_abs_diff(back.open_centers(), run.model.open_centers()), 0x1.0p-14);
}

TEST_F(IoTest, LoadModelErrors) {
  EXPECT_THROW(io::load_model(dir_ / "none.json"), DataError);
  EXPECT_THROW(io::load_model(write("bad.json", "{not json")), DataError);
  EXPECT_THROW(io::load_model(write("partial.json", R"({"mode":"horizontal"})")), DataError);
  EXPECT_THROW(io::load_model(write("mode.json", R"({"mode":"diagonal"})")), DataError);
}

TEST(Stats, JsonCarriesRoundAccounting) {
  const PlainDataset data = gen_gaussian_mixture(7);
  const std::size_t sizes[] = {1, 1};
  const auto blocks = split(data.points, PartitionSpec::from_sizes(PartitionMode::kVertical, sizes));
  KMeansOptions opt;
  opt.k = 2;
  const TrainingRun run = run_svk_means(blocks, opt, testing::config(2));
  const auto j = io::stats_json(run, {"svk", "", 2, 2, 9, 1.5});
  EXPECT_EQ(j.at("rounds_total").get<std::uint64_t>(), run.stats.rounds);
  EXPECT_EQ(j.at("rounds_per_iteration").size(), run.model.iterations);
  EXPECT_EQ(j.at("per_primitive").at("ZeroShares"), 1);
  EXPECT_EQ(j.at("bytes_total").get<std::uint64_t>(), run.stats.bytes_total());
  EXPECT_EQ(j.at("revealed_values").size(), run.model.iterations);
  EXPECT_FALSE(j.contains("division"));
  EXPECT_TRUE(j.at("bytes_per_link").contains("P1->P0"));
}

TEST(Transcript, JsonLines) {
  const fs::path p = fs::temp_directory_path() / "ppkm_transcript.jsonl";
  const Transcript t = {{1, 1, 2, "beaver.e", 32, {0xab, 0x01}}, {2, 0, 1, "cmp.bit", 24, {}}};
  io::write_transcript(p, t);
  std::ifstream in(p);
  std::string a, b;
  std::getline(in, a);
  std::getline(in, b);
  EXPECT_EQ(nlohmann::json::parse(a).at("payload"), "ab01");
  EXPECT_FALSE(nlohmann::json::parse(b).contains("payload"));
  EXPECT_EQ(nlohmann::json::parse(b).at("tag"), "cmp.bit");
  fs::remove(p);
}

}  // namespace
}  // namespace ppkm
