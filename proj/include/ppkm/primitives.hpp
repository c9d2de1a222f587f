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
#include <memory>
#include <string_view>
#include <vector>

#include "ppkm/dealer.hpp"
#include "ppkm/params.hpp"
#include "ppkm/sharing.hpp"
#include "ppkm/simnet.hpp"
#include "ppkm/tensor.hpp"

// Secure building blocks. Every function here is a protocol step: all
// parties (dealer included) call it in the same order with views of the
// same shared values, and it returns each party's view of the result.

namespace ppkm {

namespace scope_names {
inline constexpr std::string_view kElementWiseMatMul = "ElementWiseMatMul";
inline constexpr std::string_view kMatMul = "MatMul";
inline constexpr std::string_view kDReLU = "DReLU";
inline constexpr std::string_view kArgMin = "ArgMin";
inline constexpr std::string_view kDivision = "Division";
inline constexpr std::string_view kReveal = "Reveal";
}  // namespace scope_names

namespace detail {

inline std::string_view product_scope(ProductKind kind) {
  return kind == ProductKind::kElementwise ? scope_names::kElementWiseMatMul
                                           : scope_names::kMatMul;
}

// Opening round of a Beaver product with the triple already delivered.
//
// Data parties open E = X - A and F = Y - B, then output
//   Z_j = X_j*F + E*Y_j + C_j (+ U_j), and P1 additionally subtracts E*F.
// With `compact`, parties 3..p also hand their (X_j, Y_j, C_j) to P2, which
// folds their terms into its own output; the product then lives on P1 and
// P2 only (the others hold zero) and the dealer's zero share U is left out
// so that the caller can apply a local nonlinear step before
// rerandomizing.
inline LocalShare beaver_open(Party& ctx, ProductKind kind, const LocalShare& x,
                              const LocalShare& y, const TripleShare& t,
                              bool compact) {
  const Shape out_shape = product_shape(kind, x.shape(), y.shape());
  const int out_frac = x.frac_bits() + y.frac_bits();
  const int p = ctx.num_data_parties();
  const int me = ctx.id().value();
  const bool fold = compact && p > 2;

  RingTensor e, f;
  if (!ctx.is_dealer()) {
    e = x.tensor() - t.a.tensor();
    f = y.tensor() - t.b.tensor();
    ctx.send_to_data_parties("beaver.e", e);
    ctx.send_to_data_parties("beaver.f", f);
    if (fold && me >= 3) {
      ctx.send(PartyId(2), "fold.x", x.tensor());
      ctx.send(PartyId(2), "fold.y", y.tensor());
      ctx.send(PartyId(2), "fold.c", t.c.tensor());
    }
  }
  ctx.barrier();
  if (ctx.is_dealer()) return LocalShare::shape_only(ctx.id(), out_shape, out_frac);

  for (PartyId j : ctx.data_parties()) {
    if (j == ctx.id()) continue;
    e += ctx.recv(j, "beaver.e");
    f += ctx.recv(j, "beaver.f");
  }
  auto terms = [&](const RingTensor& xj, const RingTensor& yj, const RingTensor& cj) {
    return ring_product(kind, xj, f) + ring_product(kind, e, yj) + cj;
  };
  RingTensor z(out_shape);
  if (!fold || me <= 2) z = terms(x.tensor(), y.tensor(), t.c.tensor());
  if (fold && me == 2) {
    for (int j = 3; j <= p; ++j) {
      const RingTensor xj = ctx.recv(PartyId(j), "fold.x");
      const RingTensor yj = ctx.recv(PartyId(j), "fold.y");
      const RingTensor cj = ctx.recv(PartyId(j), "fold.c");
      z += terms(xj, yj, cj);
    }
  }
  if (me == 1) z -= ring_product(kind, e, f);
  if (!compact) z += t.u.tensor();
  return LocalShare(ctx.id(), std::move(z), out_frac);
}

inline TripleShare deal(Party& ctx, ProductKind kind, const LocalShare& x,
                        const LocalShare& y) {
  post_triple(ctx, kind, x.shape(), y.shape());
  ctx.barrier();
  return collect_triple(ctx, kind, x.shape(), y.shape());
}

inline std::shared_ptr<const CompareBackend> compare_backend(const Party& ctx) {
  const ProtocolParams& params = ctx.params();
  std::shared_ptr<const CompareBackend> backend = params.compare;
  if (!backend) {
    backend = std::make_shared<MaskedCompare>(params.cost.drelu_rounds,
                                              params.compare_mask_bits);
  }
  if (backend->rounds() != params.cost.drelu_rounds) {
    throw ConfigError("compare backend '" + std::string(backend->name()) +
                      "' takes " + std::to_string(backend->rounds()) +
                      " rounds but the cost model says " +
                      std::to_string(params.cost.drelu_rounds));
  }
  return backend;
}

inline void check_owned(const Party& ctx, const LocalShare& a) { ctx.check_owned(a); }
inline void check_owned(const Party& ctx, const LocalShare& a, const LocalShare& b) {
  ctx.check_owned(a);
  ctx.check_owned(b);
}

}  // namespace detail

// A product held by P1 and P2 only, plus the zero share that rerandomizes
// it across all data parties once the holders are done with it.
struct TwoPartyProduct {
  LocalShare value;
  LocalShare rerandomizer;
};

// Ring-exact Beaver product; the output scale is the sum of the input
// scales. Two rounds: triple delivery, then the E/F opening.
inline LocalShare multiply_exact(Party& ctx, const LocalShare& x, const LocalShare& y,
                                 ProductKind kind = ProductKind::kElementwise) {
  detail::check_owned(ctx, x, y);
  product_shape(kind, x.shape(), y.shape());
  auto scope = ctx.scope(std::string(detail::product_scope(kind)));
  const TripleShare t = detail::deal(ctx, kind, x, y);
  return detail::beaver_open(ctx, kind, x, y, t, /*compact=*/false);
}

// Beaver product delivered in two-party form; same two rounds.
inline TwoPartyProduct multiply_two_party(Party& ctx, const LocalShare& x,
                                          const LocalShare& y,
                                          ProductKind kind = ProductKind::kElementwise) {
  detail::check_owned(ctx, x, y);
  product_shape(kind, x.shape(), y.shape());
  auto scope = ctx.scope(std::string(detail::product_scope(kind)));
  const TripleShare t = detail::deal(ctx, kind, x, y);
  LocalShare z = detail::beaver_open(ctx, kind, x, y, t, /*compact=*/true);
  LocalShare u = ctx.is_dealer() ? LocalShare::shape_only(ctx.id(), z.shape(), 0)
                                 : t.u.with_frac_bits(z.frac_bits());
  return {std::move(z), std::move(u)};
}

// Opening round only, for callers that had the triple delivered in an
// earlier round (one round).
inline LocalShare multiply_with_triple(Party& ctx, const LocalShare& x,
                                       const LocalShare& y, const TripleShare& t,
                                       ProductKind kind = ProductKind::kElementwise) {
  detail::check_owned(ctx, x, y);
  return detail::beaver_open(ctx, kind, x, y, t, /*compact=*/false);
}

// Local truncation of a two-party product by `bits`.
inline LocalShare truncate_two_party(const Party& ctx, const LocalShare& z, int bits) {
  const int frac = z.frac_bits() - bits;
  if (ctx.is_dealer()) return z.with_frac_bits(frac);
  const int me = ctx.id().value();
  RingTensor out(z.shape());
  if (me <= 2) {
    const RingTensor& v = z.tensor();
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = truncate_share(v[i], bits, me == 1);
  }
  return z.derive(std::move(out), frac);
}

namespace detail {

inline LocalShare product_with_rescale(Party& ctx, const LocalShare& x,
                                       const LocalShare& y, ProductKind kind) {
  const int f = ctx.params().codec.frac_bits();
  if (x.frac_bits() > 0 && y.frac_bits() > 0 && f > 0) {
    TwoPartyProduct prod = multiply_two_party(ctx, x, y, kind);
    LocalShare z = truncate_two_party(ctx, prod.value, f);
    return z + prod.rerandomizer.with_frac_bits(z.frac_bits());
  }
  return multiply_exact(ctx, x, y, kind);
}

}  // namespace detail

// Z = X (.) Y. When both inputs are fixed-point the product is truncated
// back by f fractional bits. Two rounds.
inline LocalShare element_wise_mat_mul(Party& ctx, const LocalShare& x,
                                       const LocalShare& y) {
  return detail::product_with_rescale(ctx, x, y, ProductKind::kElementwise);
}

// Z = X Y. No truncation when either operand is integer-valued (e.g. a
// one-hot label matrix). Two rounds.
inline LocalShare mat_mul(Party& ctx, const LocalShare& x, const LocalShare& y) {
  return detail::product_with_rescale(ctx, x, y, ProductKind::kMatrix);
}

// Shares of [x >= 0] (so DReLU(0) = 1). Rounds: cost.drelu_rounds,
// independent of the tensor size.
inline LocalShare drelu(Party& ctx, const LocalShare& x) {
  detail::check_owned(ctx, x);
  const auto backend = detail::compare_backend(ctx);
  auto scope = ctx.scope(std::string(scope_names::kDReLU));
  return backend->sign_bits(ctx, x);
}

// [x >= 0] revealed to every party, in the same number of rounds as drelu().
inline RingTensor drelu_public(Party& ctx, const LocalShare& x) {
  detail::check_owned(ctx, x);
  const auto backend = detail::compare_backend(ctx);
  auto scope = ctx.scope(std::string(scope_names::kDReLU));
  return backend->sign_bits_public(ctx, x);
}

// Reveal in two halves so that the opening can share a round with another
// protocol's messages.
inline void post_reveal(Party& ctx, const LocalShare& x, std::string_view tag) {
  detail::check_owned(ctx, x);
  if (!ctx.is_dealer()) ctx.send_to_data_parties(tag, x.tensor());
}

inline RingTensor collect_reveal(Party& ctx, const LocalShare& x, std::string_view tag) {
  if (ctx.is_dealer()) return RingTensor();
  RingTensor sum = x.tensor();
  for (PartyId j : ctx.data_parties()) {
    if (j != ctx.id()) sum += ctx.recv(j, tag);
  }
  return sum;
}

// Opens x to every data party (one all-to-all round). The dealer receives
// nothing and gets an empty tensor.
inline RingTensor reveal(Party& ctx, const LocalShare& x,
                         std::string_view tag = "reveal") {
  auto scope = ctx.scope(std::string(scope_names::kReveal));
  post_reveal(ctx, x, tag);
  ctx.barrier();
  return collect_reveal(ctx, x, tag);
}

inline Matrix reveal_decoded(Party& ctx, const LocalShare& x,
                             std::string_view tag = "reveal") {
  const RingTensor t = reveal(ctx, x, tag);
  if (ctx.is_dealer()) return Matrix();
  return decode(t, x.frac_bits());
}

inline LocalShare column(const LocalShare& m, std::size_t j) {
  const RingTensor& t = m.view();
  if (t.rank() != 2 || j >= t.cols()) throw ShapeError("column: index out of range");
  RingTensor out({t.rows()});
  for (std::size_t i = 0; i < t.rows(); ++i) out[i] = t.at(i, j);
  return m.derive(std::move(out), m.frac_bits());
}

// Shared index (integer scale) of the row minimum of an n x k matrix,
// earliest index on ties. k-1 sequential compare-and-select steps, each one
// comparison plus one opening round (the select triple travels with the
// comparison's first round).
inline LocalShare argmin_shared(Party& ctx, const LocalShare& d) {
  detail::check_owned(ctx, d);
  if (d.shape().size() != 2 || d.shape()[1] == 0) {
    throw ShapeError("argmin: expected an n x k matrix with k >= 1, got " +
                     to_string(d.shape()));
  }
  auto scope = ctx.scope(std::string(scope_names::kArgMin));
  const std::size_t n = d.shape()[0];
  const std::size_t k = d.shape()[1];
  const Shape pair_shape{2 * n};

  LocalShare best = column(d, 0);
  LocalShare index = LocalShare::from_public(ctx.id(), RingTensor({n}), 0);
  for (std::size_t j = 1; j < k; ++j) {
    const LocalShare cand = column(d, j);
    const LocalShare gap = cand - best;
    post_triple(ctx, ProductKind::kElementwise, pair_shape, pair_shape);
    const LocalShare not_less = drelu(ctx, gap);
    const LocalShare less = add_public_scalar(-not_less, 1);
    const TripleShare t =
        collect_triple(ctx, ProductKind::kElementwise, pair_shape, pair_shape);

    const LocalShare to_index = add_public_scalar(-index, static_cast<RingValue>(j));
    const LocalShare selectors[] = {less, less};
    const LocalShare deltas[] = {gap.with_frac_bits(0), to_index};
    const LocalShare moved =
        multiply_with_triple(ctx, concat_flat(selectors), concat_flat(deltas), t);
    best = best + slice_flat(moved, 0, {n}).with_frac_bits(d.frac_bits());
    index = index + slice_flat(moved, n, {n});
  }
  return index;
}

// Row-wise argmin revealed to the data parties (0-based). The dealer gets an
// empty vector.
inline std::vector<std::size_t> argmin(Party& ctx, const LocalShare& d,
                                       std::string_view tag = "reveal.labels") {
  const LocalShare index = argmin_shared(ctx, d);
  const RingTensor opened = reveal(ctx, index, tag);
  std::vector<std::size_t> labels;
  if (ctx.is_dealer()) return labels;
  labels.reserve(opened.size());
  for (RingValue v : opened.values()) labels.push_back(static_cast<std::size_t>(v));
  return labels;
}

// Elementwise numerator / denominator for positive denominators, result at
// the codec scale.
//
// Radix-2^b long division. The first iteration spends its comparison on
// [den >= 1 unit] and its product on selecting the fallback (or zero) where
// the denominator is empty; each later iteration tests all 2^b - 1 digit
// candidates in one batched comparison and subtracts digit * divisor * 2^s
// with one product. Rounds: cost.division_rounds. Signed numerators are
// handled by offsetting the quotient by 2^(Q-1). The result is the floor of
// the exact quotient at scale f.
//
// Preconditions (not checked): |quotient| < 2^(Q-1-f) and
// denominator_raw * 2^(Q+2) stays below the comparison headroom.
inline LocalShare secure_divide(Party& ctx, const LocalShare& numerator,
                                const LocalShare& denominator,
                                const LocalShare* fallback = nullptr) {
  detail::check_owned(ctx, numerator, denominator);
  if (numerator.shape() != denominator.shape()) {
    throw ShapeError("secure_divide: numerator " + to_string(numerator.shape()) +
                     " vs denominator " + to_string(denominator.shape()));
  }
  const ProtocolParams& params = ctx.params();
  const int f = params.codec.frac_bits();
  if (fallback != nullptr) {
    ctx.check_owned(*fallback);
    if (fallback->shape() != numerator.shape() || fallback->frac_bits() != f) {
      throw ShapeError("secure_divide: fallback must match the numerator shape "
                       "at the codec scale");
    }
  }
  const int shift = f + denominator.frac_bits() - numerator.frac_bits();
  if (shift < 0 || shift > 30) {
    throw ShapeError("secure_divide: unsupported scale combination");
  }
  auto scope = ctx.scope(std::string(scope_names::kDivision));

  const int q_bits = params.division_quotient_bits;
  const int digit_bits = params.division_digit_bits();
  const int iterations = params.cost.division_iterations();
  const RingValue radix = RingValue{1} << digit_bits;
  const RingValue den_unit = RingValue{1} << denominator.frac_bits();
  const Shape shape = numerator.shape();
  const std::size_t n = numerator.size();

  // All arithmetic below is on raw ring integers (scale 0).
  const LocalShare num = (numerator * (RingValue{1} << shift)).with_frac_bits(0);
  const LocalShare fill =
      fallback ? (*fallback * den_unit).with_frac_bits(0)
               : LocalShare::from_public(ctx.id(), RingTensor(shape), 0);
  const LocalShare den = denominator.with_frac_bits(0);

  const LocalShare nonempty = drelu(ctx, add_public_scalar(den, ring_neg(1)));
  const LocalShare chosen = fill + multiply_exact(ctx, nonempty, num - fill);
  const LocalShare divisor = den + add_public_scalar(-nonempty, 1) * den_unit;

  const RingValue offset = RingValue{1} << (q_bits - 1);
  LocalShare remainder = chosen + divisor * offset;
  LocalShare quotient = LocalShare::from_public(ctx.id(), RingTensor(shape), 0);
  for (int it = iterations - 2; it >= 0; --it) {
    const RingValue place = RingValue{1} << (digit_bits * it);
    const LocalShare step = divisor * place;
    std::vector<LocalShare> trials;
    trials.reserve(radix - 1);
    for (RingValue a = 1; a < radix; ++a) trials.push_back(remainder - step * a);
    const LocalShare hits = drelu(ctx, concat_flat(trials));
    LocalShare digit = slice_flat(hits, 0, shape);
    for (RingValue a = 2; a < radix; ++a) {
      digit = digit + slice_flat(hits, (a - 1) * n, shape);
    }
    remainder = remainder - multiply_exact(ctx, digit, step);
    quotient = quotient + digit * place;
  }
  quotient = add_public_scalar(quotient, ring_neg(offset));
  return quotient.with_frac_bits(f);
}

}  // namespace ppkm
