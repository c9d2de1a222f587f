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

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace ppkm {

// Element of Z_{2^64}. Unsigned arithmetic gives the modular wrap for free.
using RingValue = std::uint64_t;

class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

inline constexpr RingValue ring_add(RingValue a, RingValue b) { return a + b; }
inline constexpr RingValue ring_sub(RingValue a, RingValue b) { return a - b; }
inline constexpr RingValue ring_mul(RingValue a, RingValue b) { return a * b; }
inline constexpr RingValue ring_neg(RingValue a) { return RingValue{0} - a; }

// Two's-complement view of a ring element.
inline constexpr std::int64_t to_signed(RingValue v) {
  return static_cast<std::int64_t>(v);
}
inline constexpr RingValue from_signed(std::int64_t v) {
  return static_cast<RingValue>(v);
}

// Arithmetic right shift in the signed interpretation.
inline constexpr RingValue arith_shift_right(RingValue v, int bits) {
  return from_signed(to_signed(v) >> bits);
}

// Signed fixed-point embedding of reals into Z_{2^64}.
//
// x is represented as round(x * 2^f) mod 2^64; values in [2^63, 2^64) decode
// as negative. Products of two encodings carry 2f fractional bits and must be
// truncated back to f.
class FixedCodec {
 public:
  static constexpr int kDefaultFracBits = 13;

  constexpr FixedCodec() = default;
  explicit FixedCodec(int frac_bits) : frac_bits_(frac_bits) {
    if (frac_bits < 0 || frac_bits > 30) {
      throw std::invalid_argument("FixedCodec: frac_bits must be in [0, 30], got " +
                                  std::to_string(frac_bits));
    }
  }

  constexpr int frac_bits() const { return frac_bits_; }

  RingValue encode(double x) const { return encode_scaled(x, frac_bits_); }
  double decode(RingValue v) const { return decode_scaled(v, frac_bits_); }

  // Right shift by f in the signed interpretation. Applied to a whole value
  // this is exact floor division; applied per share see truncate_share().
  RingValue truncate(RingValue v) const {
    return arith_shift_right(v, frac_bits_);
  }

  // Encodes x with an explicit scale (e.g. 2f for squared quantities, 0 for
  // integers).
  static RingValue encode_scaled(double x, int frac_bits) {
    if (!std::isfinite(x)) {
      throw RangeError("FixedCodec: cannot encode non-finite value");
    }
    const double limit = std::ldexp(1.0, 63 - frac_bits);
    if (std::fabs(x) >= limit) {
      throw RangeError("FixedCodec: |" + std::to_string(x) + "| >= 2^" +
                       std::to_string(63 - frac_bits));
    }
    const double scaled = std::nearbyint(std::ldexp(x, frac_bits));
    // scaled may round up to exactly 2^63 at the boundary.
    if (scaled >= std::ldexp(1.0, 63)) {
      throw RangeError("FixedCodec: value rounds outside the signed range");
    }
    return from_signed(static_cast<std::int64_t>(scaled));
  }

  static double decode_scaled(RingValue v, int frac_bits) {
    return std::ldexp(static_cast<double>(to_signed(v)), -frac_bits);
  }

  friend constexpr bool operator==(const FixedCodec&, const FixedCodec&) = default;

 private:
  int frac_bits_ = kDefaultFracBits;
};

// Local truncation of one additive share when the secret is held by exactly
// two parties (probabilistic truncation): the first holder shifts its share,
// the second shifts the negation and negates back. The reconstructed result
// is off by at most one unit unless a share lies within |secret| of the
// signed boundary.
inline RingValue truncate_share(RingValue share, int bits, bool first_holder) {
  if (first_holder) return arith_shift_right(share, bits);
  return ring_neg(arith_shift_right(ring_neg(share), bits));
}

// Floor division of a signed ring element by a positive public integer.
inline RingValue signed_floor_div(RingValue v, std::uint64_t divisor) {
  const std::int64_t s = to_signed(v);
  const auto d = static_cast<std::int64_t>(divisor);
  std::int64_t q = s / d;
  if ((s % d != 0) && (s < 0)) --q;
  return from_signed(q);
}

// Same pairing rule as truncate_share(), for division by a public count.
inline RingValue divide_share(RingValue share, std::uint64_t divisor,
                              bool first_holder) {
  if (first_holder) return signed_floor_div(share, divisor);
  return ring_neg(signed_floor_div(ring_neg(share), divisor));
}

}  // namespace ppkm
