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

#include <compare>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ppkm/random.hpp"
#include "ppkm/ring.hpp"
#include "ppkm/tensor.hpp"

namespace ppkm {

// Party index: 0 is the assistant (dealer), 1..p hold data.
class PartyId {
 public:
  constexpr PartyId() = default;
  constexpr explicit PartyId(int value) : value_(value) {}
  constexpr int value() const { return value_; }
  constexpr bool is_dealer() const { return value_ == 0; }
  friend constexpr auto operator<=>(PartyId, PartyId) = default;

 private:
  int value_ = 0;
};

inline constexpr PartyId kDealer{0};
inline constexpr PartyId kFirstDataParty{1};

inline std::string to_string(PartyId id) { return "P" + std::to_string(id.value()); }

// Raised when a party touches state it does not own.
class ConfinementError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// One party's view of a shared tensor.
//
// Data parties hold their additive share; the dealer's view carries only the
// public shape and scale, which is enough for it to produce correlated
// randomness of the right size. frac_bits is the fixed-point scale of the
// secret (0 for integers and bits, f for encoded reals, 2f for unreduced
// products).
class LocalShare {
 public:
  LocalShare() = default;
  LocalShare(PartyId owner, RingTensor values, int frac_bits)
      : owner_(owner),
        values_(std::move(values)),
        frac_bits_(frac_bits),
        has_values_(!owner.is_dealer()) {}

  static LocalShare shape_only(PartyId owner, Shape shape, int frac_bits) {
    LocalShare s(owner, RingTensor(std::move(shape)), frac_bits);
    s.has_values_ = false;
    return s;
  }

  // Share of a public tensor: the first data party holds the value, the rest
  // hold zero.
  static LocalShare from_public(PartyId owner, const RingTensor& value,
                                int frac_bits) {
    if (owner.is_dealer()) return shape_only(owner, value.shape(), frac_bits);
    if (owner == kFirstDataParty) return LocalShare(owner, value, frac_bits);
    return LocalShare(owner, RingTensor(value.shape()), frac_bits);
  }

  PartyId owner() const { return owner_; }
  const Shape& shape() const { return values_.shape(); }
  std::size_t size() const { return values_.size(); }
  int frac_bits() const { return frac_bits_; }
  bool has_values() const { return has_values_; }

  const RingTensor& tensor() const {
    if (!has_values_) {
      throw ConfinementError(to_string(owner_) +
                             " holds no share values for this tensor");
    }
    return values_;
  }
  RingTensor& mutable_tensor() {
    if (!has_values_) {
      throw ConfinementError(to_string(owner_) +
                             " holds no share values for this tensor");
    }
    return values_;
  }

  LocalShare with_frac_bits(int frac_bits) const {
    LocalShare s = *this;
    s.frac_bits_ = frac_bits;
    return s;
  }

  LocalShare reshaped(Shape shape) const {
    LocalShare s = *this;
    s.values_ = values_.reshaped(std::move(shape));
    return s;
  }

  // Same owner, new values; keeps the dealer's view value-free.
  LocalShare derive(RingTensor values, int frac_bits) const {
    LocalShare s(owner_, std::move(values), frac_bits);
    s.has_values_ = has_values_;
    return s;
  }

  // Unchecked access for local linear algebra; the dealer's placeholder
  // values are zeros and never leave the party.
  const RingTensor& view() const { return values_; }

 private:
  PartyId owner_{};
  RingTensor values_;
  int frac_bits_ = 0;
  bool has_values_ = false;
};

inline void require_same_owner(const LocalShare& a, const LocalShare& b) {
  if (a.owner() != b.owner()) {
    throw ConfinementError("combining shares of " + to_string(a.owner()) +
                           " and " + to_string(b.owner()));
  }
}

inline void require_same_scale(const LocalShare& a, const LocalShare& b,
                               const char* what) {
  if (a.frac_bits() != b.frac_bits()) {
    throw ShapeError(std::string(what) + ": scale mismatch " +
                     std::to_string(a.frac_bits()) + " vs " +
                     std::to_string(b.frac_bits()));
  }
}

inline LocalShare operator+(const LocalShare& a, const LocalShare& b) {
  require_same_owner(a, b);
  require_same_scale(a, b, "share +");
  return a.derive(a.view() + b.view(), a.frac_bits());
}

inline LocalShare operator-(const LocalShare& a, const LocalShare& b) {
  require_same_owner(a, b);
  require_same_scale(a, b, "share -");
  return a.derive(a.view() - b.view(), a.frac_bits());
}

inline LocalShare operator-(const LocalShare& a) {
  return a.derive(-a.view(), a.frac_bits());
}

// Multiplication by a public ring scalar; scale is unchanged unless the
// caller relabels it.
inline LocalShare operator*(const LocalShare& a, RingValue scalar) {
  return a.derive(a.view() * scalar, a.frac_bits());
}

// Adds a public tensor (same scale as the share): only P1 adds it.
inline LocalShare add_public(const LocalShare& a, const RingTensor& value) {
  a.view().require_same_shape(value, "add_public");
  if (a.owner() != kFirstDataParty) return a;
  return a.derive(a.view() + value, a.frac_bits());
}

inline LocalShare add_public_scalar(const LocalShare& a, RingValue value) {
  return add_public(a, RingTensor::filled(a.shape(), value));
}

// Public-times-shared elementwise product (no communication).
inline LocalShare mul_public(const LocalShare& a, const RingTensor& value,
                             int added_frac_bits = 0) {
  return a.derive(hadamard(a.view(), value), a.frac_bits() + added_frac_bits);
}

inline LocalShare transpose(const LocalShare& a) {
  return a.derive(transpose(a.view()), a.frac_bits());
}

// Rows idx[0], idx[1], ... of a rank-2 share.
inline LocalShare gather_rows(const LocalShare& a,
                              std::span<const std::size_t> idx) {
  const RingTensor& t = a.view();
  RingTensor out({idx.size(), t.cols()});
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] >= t.rows()) throw ShapeError("gather_rows: index out of range");
    for (std::size_t c = 0; c < t.cols(); ++c) out.at(r, c) = t.at(idx[r], c);
  }
  return a.derive(std::move(out), a.frac_bits());
}

// Concatenates flattened shares into one rank-1 share.
inline LocalShare concat_flat(std::span<const LocalShare> parts) {
  if (parts.empty()) throw ShapeError("concat_flat: no parts");
  std::vector<RingValue> data;
  for (const auto& p : parts) {
    require_same_owner(parts[0], p);
    require_same_scale(parts[0], p, "concat_flat");
    data.insert(data.end(), p.view().raw().begin(), p.view().raw().end());
  }
  const std::size_t n = data.size();
  return parts[0].derive(RingTensor({n}, std::move(data)), parts[0].frac_bits());
}

// Elements [offset, offset + count) of a flattened share, reshaped.
inline LocalShare slice_flat(const LocalShare& a, std::size_t offset, Shape shape) {
  const std::size_t count = num_elements(shape);
  if (offset + count > a.size()) throw ShapeError("slice_flat: out of range");
  std::vector<RingValue> data(a.view().raw().begin() + offset,
                              a.view().raw().begin() + offset + count);
  return a.derive(RingTensor(std::move(shape), std::move(data)), a.frac_bits());
}

// Splits a ring tensor into p additive shares: p-1 uniform, the last fixes the
// sum.
inline std::vector<RingTensor> split_additive(const RingTensor& secret, int p,
                                              Rng& rng) {
  if (p < 1) throw std::invalid_argument("split_additive: need at least one party");
  std::vector<RingTensor> shares;
  shares.reserve(static_cast<std::size_t>(p));
  RingTensor last = secret;
  for (int j = 0; j + 1 < p; ++j) {
    shares.push_back(RingTensor::random(secret.shape(), rng));
    last -= shares.back();
  }
  shares.push_back(std::move(last));
  return shares;
}

// Additively shared tensor as seen by the harness: all p data-party shares,
// indexed by PartyId 1..p.
class SharedMatrix {
 public:
  SharedMatrix() = default;
  SharedMatrix(std::vector<RingTensor> shares, int frac_bits)
      : shares_(std::move(shares)), frac_bits_(frac_bits) {
    if (shares_.empty()) throw std::invalid_argument("SharedMatrix: no shares");
    for (const auto& s : shares_) {
      if (s.shape() != shares_[0].shape()) {
        throw ShapeError("SharedMatrix: share shapes differ");
      }
    }
  }

  int num_parties() const { return static_cast<int>(shares_.size()); }
  const Shape& shape() const { return shares_.at(0).shape(); }
  int frac_bits() const { return frac_bits_; }

  const RingTensor& share(PartyId id) const {
    if (id.is_dealer() || id.value() > num_parties()) {
      throw std::out_of_range("SharedMatrix: no share for " + to_string(id));
    }
    return shares_[static_cast<std::size_t>(id.value() - 1)];
  }

  LocalShare local(PartyId id) const {
    if (id.is_dealer()) return LocalShare::shape_only(id, shape(), frac_bits_);
    return LocalShare(id, share(id), frac_bits_);
  }

  // Collects per-party views (index = party id; index 0 may be the dealer's
  // placeholder and is skipped).
  static SharedMatrix assemble(std::span<const LocalShare> views) {
    std::vector<RingTensor> shares;
    int frac = 0;
    for (const auto& v : views) {
      if (v.owner().is_dealer()) continue;
      if (static_cast<int>(shares.size()) + 1 != v.owner().value()) {
        throw std::invalid_argument("SharedMatrix::assemble: views out of order");
      }
      shares.push_back(v.tensor());
      frac = v.frac_bits();
    }
    return SharedMatrix(std::move(shares), frac);
  }

  RingTensor reconstruct_ring() const {
    RingTensor sum(shape());
    for (const auto& s : shares_) sum += s;
    return sum;
  }

 private:
  std::vector<RingTensor> shares_;
  int frac_bits_ = 0;
};

inline SharedMatrix share_ring(const RingTensor& secret, int p, Rng& rng,
                               int frac_bits) {
  if (p < 2) throw std::invalid_argument("share: at least 2 data parties required");
  return SharedMatrix(split_additive(secret, p, rng), frac_bits);
}

inline RingTensor encode(const Matrix& m, const FixedCodec& codec) {
  RingTensor t(m.shape());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = codec.encode(m.values()[i]);
  return t;
}

inline SharedMatrix share(const Matrix& secret, int p, Rng& rng,
                          const FixedCodec& codec = FixedCodec()) {
  return share_ring(encode(secret, codec), p, rng, codec.frac_bits());
}

// Decodes a ring tensor as a matrix; rank-1 becomes a column, higher ranks
// fold trailing axes into columns.
inline Matrix decode(const RingTensor& t, int frac_bits) {
  const std::size_t rows = t.rank() == 0 ? 1 : t.shape()[0];
  const std::size_t cols = rows == 0 ? 0 : t.size() / rows;
  Matrix out(rows, cols);
  for (std::size_t i = 0; i < t.size(); ++i) {
    out.values()[i] = FixedCodec::decode_scaled(t[i], frac_bits);
  }
  return out;
}

inline Matrix reconstruct(const SharedMatrix& m) {
  return decode(m.reconstruct_ring(), m.frac_bits());
}

inline SharedMatrix zero_shares(const Shape& shape, int p, Rng& rng) {
  return share_ring(RingTensor(shape), p, rng, 0);
}

}  // namespace ppkm
