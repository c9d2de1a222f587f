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
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ppkm/params.hpp"
#include "ppkm/random.hpp"
#include "ppkm/sharing.hpp"
#include "ppkm/simnet.hpp"
#include "ppkm/tensor.hpp"

namespace ppkm {

enum class ProductKind { kElementwise, kMatrix };

inline Shape product_shape(ProductKind kind, const Shape& lhs, const Shape& rhs) {
  if (kind == ProductKind::kElementwise) {
    if (lhs != rhs) {
      throw ShapeError("elementwise product: shape " + to_string(lhs) + " vs " +
                       to_string(rhs));
    }
    return lhs;
  }
  if (lhs.size() != 2 || rhs.size() != 2 || lhs[1] != rhs[0]) {
    throw ShapeError("matrix product: shape " + to_string(lhs) + " x " +
                     to_string(rhs));
  }
  return {lhs[0], rhs[1]};
}

inline RingTensor ring_product(ProductKind kind, const RingTensor& a,
                               const RingTensor& b) {
  return kind == ProductKind::kElementwise ? hadamard(a, b) : matmul(a, b);
}

// Dealer-generated multiplication triple: c = a * b (elementwise or matrix
// product) in the ring, each component additively shared.
struct BeaverTriple {
  ProductKind kind = ProductKind::kElementwise;
  SharedMatrix a;
  SharedMatrix b;
  SharedMatrix c;
};

inline BeaverTriple gen_triple(ProductKind kind, const Shape& lhs, const Shape& rhs,
                               int p, Rng& rng) {
  product_shape(kind, lhs, rhs);  // validates
  const RingTensor a = RingTensor::random(lhs, rng);
  const RingTensor b = RingTensor::random(rhs, rng);
  const RingTensor c = ring_product(kind, a, b);
  return {kind, share_ring(a, p, rng, 0), share_ring(b, p, rng, 0),
          share_ring(c, p, rng, 0)};
}

inline BeaverTriple gen_triple(const Shape& shape, int p, Rng& rng) {
  return gen_triple(ProductKind::kElementwise, shape, shape, p, rng);
}

// One data party's piece of a dealt triple plus the dealer's zero share used
// to rerandomize the product.
struct TripleShare {
  LocalShare a;
  LocalShare b;
  LocalShare c;
  LocalShare u;
};

// Dealer side: samples a triple and a zero sharing of the product shape and
// posts each data party's pieces. Data parties call this too and only record
// the shapes; the pieces arrive at the next barrier (collect_triple).
inline void post_triple(Party& ctx, ProductKind kind, const Shape& lhs,
                        const Shape& rhs) {
  if (!ctx.is_dealer()) return;
  const int p = ctx.num_data_parties();
  const BeaverTriple t = gen_triple(kind, lhs, rhs, p, ctx.rng());
  const SharedMatrix u = zero_shares(product_shape(kind, lhs, rhs), p, ctx.rng());
  for (PartyId j : ctx.data_parties()) {
    ctx.send(j, "triple.a", t.a.share(j));
    ctx.send(j, "triple.b", t.b.share(j));
    ctx.send(j, "triple.c", t.c.share(j));
    ctx.send(j, "triple.u", u.share(j));
  }
}

inline TripleShare collect_triple(Party& ctx, ProductKind kind, const Shape& lhs,
                                  const Shape& rhs) {
  const Shape out = product_shape(kind, lhs, rhs);
  if (ctx.is_dealer()) {
    return {LocalShare::shape_only(ctx.id(), lhs, 0),
            LocalShare::shape_only(ctx.id(), rhs, 0),
            LocalShare::shape_only(ctx.id(), out, 0),
            LocalShare::shape_only(ctx.id(), out, 0)};
  }
  auto take = [&](std::string_view tag, const Shape& expect) {
    RingTensor t = ctx.recv(kDealer, tag);
    if (t.shape() != expect) {
      throw ProtocolError(std::string("triple component ") + std::string(tag) +
                          " has shape " + to_string(t.shape()) + ", expected " +
                          to_string(expect));
    }
    return LocalShare(ctx.id(), std::move(t), 0);
  };
  TripleShare s;
  s.a = take("triple.a", lhs);
  s.b = take("triple.b", rhs);
  s.c = take("triple.c", out);
  s.u = take("triple.u", out);
  return s;
}

// Sign-preserving blinding applied by the data parties before a value is
// opened to the dealer: y = flip * (multiplier * x + offset), with
// multiplier in [2, 2^mask_bits), offset in [1, multiplier) and flip = +-1.
// For integer x this gives y >= 1 when x >= 0 and y <= -1 when x < 0, so the
// sign of y (up to the flip) is the sign of x and y is never zero.
struct CompareMask {
  RingValue multiplier = 0;
  RingValue offset = 0;
  bool flip = false;

  void validate() const {
    if (multiplier < 2) {
      throw std::invalid_argument("CompareMask: degenerate multiplier");
    }
    if (offset < 1 || offset >= multiplier) {
      throw std::invalid_argument("CompareMask: offset outside [1, multiplier)");
    }
  }
};

inline CompareMask draw_compare_mask(Rng& rng, int mask_bits, bool allow_flip) {
  CompareMask m;
  m.multiplier = 2 + rng.uniform_int((std::uint64_t{1} << mask_bits) - 2);
  m.offset = 1 + rng.uniform_int(m.multiplier - 1);
  m.flip = allow_flip && (rng.next_u64() & 1) != 0;
  m.validate();
  return m;
}

// Dealer's assistance step: given the reconstructed masked values, returns
// fresh additive shares of [y >= 0] for p data parties. The dealer sees only
// the masked values.
inline SharedMatrix assist_compare(std::span<const RingValue> masked, int p, Rng& rng) {
  RingTensor bits({masked.size()});
  for (std::size_t i = 0; i < masked.size(); ++i) {
    bits[i] = to_signed(masked[i]) >= 0 ? 1 : 0;
  }
  return share_ring(bits, p, rng, 0);
}

// Secure sign test [x >= 0] over additive shares. Implementations must keep
// every party in lockstep (same number of barriers at every party).
class CompareBackend {
 public:
  virtual ~CompareBackend() = default;
  virtual std::string_view name() const = 0;
  virtual int rounds() const = 0;
  // Additive shares of [x >= 0] (integer scale). The dealer returns its
  // shape-only view.
  virtual LocalShare sign_bits(Party& ctx, const LocalShare& x) const = 0;
  // [x >= 0] in the clear at every party, dealer included.
  virtual RingTensor sign_bits_public(Party& ctx, const LocalShare& x) const = 0;
};

// Reference backend: dealer-assisted masked comparison.
//
// Round 1: data parties blind their shares with a CompareMask drawn from
// their common randomness (unknown to the dealer), rerandomize with a zero
// sharing, and open the result to the dealer. Rounds 2..R-1 are idle
// synchronization rounds that pad the protocol to its configured cost.
// Round R: the dealer answers with fresh shares of the sign bit (or the bit
// itself for public outputs, where no flip is applied); data parties undo
// the flip locally.
//
// The dealer learns |x| up to the multiplicative mask, which is the
// accepted leakage of this backend.
class MaskedCompare final : public CompareBackend {
 public:
  MaskedCompare(int rounds, int mask_bits) : rounds_(rounds), mask_bits_(mask_bits) {
    if (rounds < 2) throw ConfigError("MaskedCompare: needs at least 2 rounds");
    if (mask_bits < 2 || mask_bits > 30) {
      throw ConfigError("MaskedCompare: mask_bits must be in [2, 30]");
    }
  }

  std::string_view name() const override { return "masked-compare"; }
  int rounds() const override { return rounds_; }

  LocalShare sign_bits(Party& ctx, const LocalShare& x) const override {
    ctx.check_owned(x);
    const Opened opened = open_masked(ctx, x, /*allow_flip=*/true);
    pad(ctx);
    if (ctx.is_dealer()) {
      const SharedMatrix bits =
          assist_compare(opened.masked.raw(), ctx.num_data_parties(), ctx.rng());
      for (PartyId j : ctx.data_parties()) ctx.send(j, "cmp.bit", bits.share(j));
    }
    ctx.barrier();
    if (ctx.is_dealer()) return LocalShare::shape_only(ctx.id(), x.shape(), 0);
    RingTensor beta = ctx.recv(kDealer, "cmp.bit");
    const bool first = ctx.id() == kFirstDataParty;
    for (std::size_t i = 0; i < beta.size(); ++i) {
      if (opened.masks[i].flip) beta[i] = (first ? RingValue{1} : RingValue{0}) - beta[i];
    }
    return LocalShare(ctx.id(), beta.reshaped(x.shape()), 0);
  }

  RingTensor sign_bits_public(Party& ctx, const LocalShare& x) const override {
    ctx.check_owned(x);
    const Opened opened = open_masked(ctx, x, /*allow_flip=*/false);
    pad(ctx);
    RingTensor bits;
    if (ctx.is_dealer()) {
      bits = RingTensor({opened.masked.size()});
      for (std::size_t i = 0; i < bits.size(); ++i) {
        bits[i] = to_signed(opened.masked[i]) >= 0 ? 1 : 0;
      }
      for (PartyId j : ctx.data_parties()) ctx.send(j, "cmp.public", bits);
    }
    ctx.barrier();
    if (!ctx.is_dealer()) bits = ctx.recv(kDealer, "cmp.public");
    return bits.reshaped(x.shape());
  }

 private:
  struct Opened {
    std::vector<CompareMask> masks;  // data parties
    RingTensor masked;               // dealer: reconstructed masked values
  };

  // Round 1.
  Opened open_masked(Party& ctx, const LocalShare& x, bool allow_flip) const {
    const std::size_t n = x.size();
    Opened out;
    auto& masks = out.masks;
    if (!ctx.is_dealer()) {
      Rng& common = ctx.common_rng();
      const int p = ctx.num_data_parties();
      const int me = ctx.id().value();
      masks.reserve(n);
      RingTensor z({n});
      const RingTensor& xs = x.tensor();
      for (std::size_t i = 0; i < n; ++i) {
        const CompareMask m = draw_compare_mask(common, mask_bits_, allow_flip);
        // Zero sharing among data parties: p-1 random values, the last
        // closes the sum.
        RingValue rho = 0, acc = 0;
        for (int j = 1; j < p; ++j) {
          const RingValue r = common.next_u64();
          acc += r;
          if (j == me) rho = r;
        }
        if (me == p) rho = ring_neg(acc);
        RingValue y = m.multiplier * xs[i];
        if (me == 1) y += m.offset;
        if (m.flip) y = ring_neg(y);
        z[i] = y + rho;
        masks.push_back(m);
      }
      ctx.send(kDealer, "cmp.masked", z);
    }
    ctx.barrier();
    if (ctx.is_dealer()) {
      out.masked = RingTensor({n});
      for (PartyId j : ctx.data_parties()) {
        const RingTensor zj = ctx.recv(j, "cmp.masked");
        if (zj.size() != n) throw ProtocolError("cmp.masked: size mismatch");
        out.masked += zj;
      }
    }
    return out;
  }

  void pad(Party& ctx) const {
    for (int r = 2; r < rounds_; ++r) {
      if (ctx.is_dealer()) {
        for (PartyId j : ctx.data_parties()) ctx.send(j, "cmp.sync", RingTensor({0}));
      }
      ctx.barrier();
      if (!ctx.is_dealer()) ctx.recv(kDealer, "cmp.sync");
    }
  }

  int rounds_;
  int mask_bits_;
};

}  // namespace ppkm
