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

#include <numeric>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "ppkm/primitives.hpp"
#include "test_util.hpp"

namespace ppkm {
namespace {

using testing::config;

TEST(RunProtocol, NoCommunicationTakesNoRounds) {
  const auto run = run_protocol(config(2), [](Party& ctx) { return ctx.id().value(); });
  EXPECT_EQ(run.stats.rounds, 0u);
  EXPECT_EQ(run.outputs, (std::vector<int>{0, 1, 2}));
}

TEST(RunProtocol, DealerBroadcastIsOneRound) {
  const auto run = run_protocol(config(3), [](Party& ctx) {
    if (ctx.is_dealer()) ctx.send_to_data_parties("hello", RingTensor({1}, {42}));
    ctx.barrier();
    return ctx.is_dealer() ? RingValue{42} : ctx.recv(kDealer, "hello")[0];
  });
  EXPECT_EQ(run.stats.rounds, 1u);
  EXPECT_EQ(run.stats.messages, 3u);
  for (RingValue v : run.outputs) EXPECT_EQ(v, 42u);
}

TEST(RunProtocol, ElementWiseMatMulIsTwoRounds) {
  Rng rng(1);
  const FixedCodec codec;
  const SharedMatrix x = share(Matrix{{1.5, -2}}, 2, rng);
  const SharedMatrix y = share(Matrix{{4, 0.5}}, 2, rng);
  NetStats stats;
  const SharedMatrix z = testing::run_shared(
      config(2),
      [&](Party& ctx) { return element_wise_mat_mul(ctx, ctx.mine(x), ctx.mine(y)); }, &stats);
  EXPECT_EQ(stats.rounds, 2u);
  EXPECT_NEAR(reconstruct(z)(0, 0), 6.0, 1e-3);
  EXPECT_NEAR(reconstruct(z)(0, 1), -1.0, 1e-3);
}

TEST(RoundBarrier, CountsOnlyBarriersWithMessages) {
  const auto run = run_protocol(config(2), [](Party& ctx) {
    for (int r = 0; r < 2; ++r) {
      if (ctx.id() == PartyId(1)) ctx.send(PartyId(2), "ping", RingTensor({1}));
      ctx.barrier();
      if (ctx.id() == PartyId(2)) ctx.recv(PartyId(1), "ping");
    }
    ctx.barrier();  // empty phase
    return 0;
  });
  EXPECT_EQ(run.stats.rounds, 2u);
}

TEST(RoundBarrier, NestedScopesChargeInnermost) {
  Rng rng(2);
  const SharedMatrix x = share(Matrix{{1, 2}, {3, 4}}, 2, rng);
  const auto run = run_protocol(config(2), [&](Party& ctx) {
    auto outer = ctx.scope("Outer");
    const LocalShare a = ctx.mine(x);
    const LocalShare m = mat_mul(ctx, a, a);
    const LocalShare bits = drelu(ctx, m);
    reveal(ctx, bits);
    return 0;
  });
  const auto& per = run.stats.per_primitive;
  EXPECT_EQ(per.at("MatMul"), 2u);
  EXPECT_EQ(per.at("DReLU"), 8u);
  EXPECT_EQ(per.at("Reveal"), 1u);
  EXPECT_EQ(per.count("Outer"), 0u);
  const auto total = std::accumulate(per.begin(), per.end(), std::uint64_t{0},
                                     [](auto s, const auto& kv) { return s + kv.second; });
  EXPECT_EQ(total, run.stats.rounds);
}

TEST(RunProtocol, DeadlockReportsBlockingTag) {
  try {
    run_protocol(config(2), [](Party& ctx) {
      ctx.barrier();
      if (ctx.id() == PartyId(1)) ctx.recv(PartyId(2), "never-sent");
      return 0;
    });
    FAIL() << "expected a deadlock";
  } catch (const DeadlockError& e) {
    EXPECT_EQ(e.tag(), "never-sent");
  }
}

TEST(RunProtocol, MismatchedScopesAreRejected) {
  EXPECT_THROW(run_protocol(config(2),
                            [](Party& ctx) {
                              auto s = ctx.scope(ctx.is_dealer() ? "A" : "B");
                              ctx.send_to_data_parties("x", RingTensor({1}));
                              ctx.barrier();
                              return 0;
                            }),
               ProtocolError);
}

TEST(RunProtocol, RequiresTwoDataParties) {
  EXPECT_THROW(run_protocol(config(1), [](Party&) { return 0; }), std::invalid_argument);
}

TEST(Confinement, ForeignShareRejected) {
  Rng rng(3);
  const SharedMatrix x = share(Matrix{{1.0}}, 2, rng);
  EXPECT_THROW(run_protocol(config(2),
                            [&](Party& ctx) {
                              const LocalShare other = x.local(PartyId(ctx.id().value() == 1 ? 2 : 1));
                              return drelu(ctx, other).size();
                            }),
               ConfinementError);
}

TEST(Confinement, DealerHasNoCommonRandomnessOrValues) {
  EXPECT_THROW(run_protocol(config(2),
                            [](Party& ctx) {
                              ctx.common_rng();
                              return 0;
                            }),
               ConfinementError);
  Rng rng(4);
  const SharedMatrix x = share(Matrix{{1.0}}, 2, rng);
  EXPECT_THROW(run_protocol(config(2),
                            [&](Party& ctx) { return ctx.mine(x).tensor().size(); }),
               ConfinementError);
}

TEST(Wire, HeaderPlusEightBytesPerValue) {
  const RingTensor t({3, 4});
  EXPECT_EQ(wire::encode(t).size(), wire::kHeaderBytes + 8 * 12);
  const RingTensor u({2, 2, 2}, {1, 2, 3, 4, 5, 6, 7, ~RingValue{0}});
  EXPECT_EQ(wire::decode(wire::encode(u)), u);
  auto bytes = wire::encode(u);
  bytes.pop_back();
  EXPECT_THROW(wire::decode(bytes), ProtocolError);
}

// A protocol with plenty of traffic in every round.
std::vector<LocalShare> busy_program(Party& ctx, const SharedMatrix& x) {
  const LocalShare a = ctx.mine(x);
  const LocalShare sq = element_wise_mat_mul(ctx, a, a);
  const LocalShare bits = drelu(ctx, a);
  return {sq, bits, argmin_shared(ctx, a)};
}

TEST(Determinism, IdenticalSeedsGiveIdenticalTranscripts) {
  Rng rng(5);
  Matrix m(6, 3);
  for (double& v : m.values()) v = rng.uniform(-5, 5);
  const SharedMatrix x = share(m, 3, rng);
  NetConfig cfg = config(3, 99);
  cfg.record_payloads = true;
  const auto a = run_protocol(cfg, [&](Party& ctx) { return busy_program(ctx, x); });
  const auto b = run_protocol(cfg, [&](Party& ctx) { return busy_program(ctx, x); });
  EXPECT_EQ(a.transcript, b.transcript);
  EXPECT_EQ(a.stats, b.stats);
  cfg.seed = 100;
  const auto c = run_protocol(cfg, [&](Party& ctx) { return busy_program(ctx, x); });
  EXPECT_NE(a.transcript, c.transcript);
}

TEST(Determinism, OutputsInvariantUnderDeliveryPermutation) {
  Rng rng(6);
  Matrix m(6, 3);
  for (double& v : m.values()) v = rng.uniform(-5, 5);
  const SharedMatrix x = share(m, 3, rng);
  NetConfig cfg = config(3, 7);
  const auto base = run_protocol(cfg, [&](Party& ctx) { return busy_program(ctx, x); });
  for (std::uint64_t shuffle = 1; shuffle <= 5; ++shuffle) {
    cfg.delivery_shuffle_seed = shuffle;
    const auto run = run_protocol(cfg, [&](Party& ctx) { return busy_program(ctx, x); });
    for (std::size_t p = 1; p < run.outputs.size(); ++p) {
      for (std::size_t i = 0; i < run.outputs[p].size(); ++i) {
        EXPECT_EQ(run.outputs[p][i].tensor(), base.outputs[p][i].tensor());
      }
    }
    EXPECT_EQ(run.stats, base.stats);
  }
}

TEST(Transcript, RecordsEveryMessage) {
  Rng rng(7);
  const SharedMatrix x = share(Matrix{{1, 2}}, 2, rng);
  const auto run = run_protocol(config(2), [&](Party& ctx) {
    return element_wise_mat_mul(ctx, ctx.mine(x), ctx.mine(x)).size();
  });
  EXPECT_EQ(run.transcript.size(), run.stats.messages);
  std::uint64_t bytes = 0;
  for (const auto& r : run.transcript) {
    bytes += r.byte_len;
    EXPECT_TRUE(r.payload.empty());
    EXPECT_GE(r.round, 1u);
    EXPECT_LE(r.round, 2u);
  }
  EXPECT_EQ(bytes, run.stats.bytes_total());
}

}  // namespace
}  // namespace ppkm
