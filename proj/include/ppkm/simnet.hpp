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

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <cstring>
#include <deque>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

#include "ppkm/params.hpp"
#include "ppkm/random.hpp"
#include "ppkm/sharing.hpp"
#include "ppkm/tensor.hpp"

namespace ppkm {

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A party waited for a message that was never sent.
class DeadlockError : public ProtocolError {
 public:
  DeadlockError(std::string message, std::string tag)
      : ProtocolError(std::move(message)), tag_(std::move(tag)) {}
  const std::string& tag() const { return tag_; }

 private:
  std::string tag_;
};

namespace wire {

// Payload layout: u32 rank, u32 dims[4], u32 reserved, then the values as
// little-endian u64.
inline constexpr std::size_t kHeaderBytes = 24;
inline constexpr std::size_t kMaxRank = 4;

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{in[at + i]} << (8 * i);
  return v;
}

inline std::vector<std::uint8_t> encode(const RingTensor& t) {
  if (t.rank() > kMaxRank) throw ShapeError("wire::encode: rank > 4");
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + 8 * t.size());
  put_u32(out, static_cast<std::uint32_t>(t.rank()));
  for (std::size_t i = 0; i < kMaxRank; ++i) {
    put_u32(out, i < t.rank() ? static_cast<std::uint32_t>(t.dim(i)) : 0);
  }
  put_u32(out, 0);
  for (RingValue v : t.values()) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  return out;
}

inline RingTensor decode(std::span<const std::uint8_t> in) {
  if (in.size() < kHeaderBytes) throw ProtocolError("wire::decode: short header");
  const std::uint32_t rank = get_u32(in, 0);
  if (rank > kMaxRank) throw ProtocolError("wire::decode: bad rank");
  Shape shape;
  for (std::uint32_t i = 0; i < rank; ++i) shape.push_back(get_u32(in, 4 + 4 * i));
  const std::size_t n = num_elements(shape);
  if (in.size() != kHeaderBytes + 8 * n) {
    throw ProtocolError("wire::decode: payload length does not match shape");
  }
  std::vector<RingValue> values(n);
  for (std::size_t k = 0; k < n; ++k) {
    RingValue v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= RingValue{in[kHeaderBytes + 8 * k + i]} << (8 * i);
    }
    values[k] = v;
  }
  return RingTensor(std::move(shape), std::move(values));
}

}  // namespace wire

struct Message {
  PartyId from;
  PartyId to;
  std::string tag;
  std::vector<std::uint8_t> payload;
  std::uint64_t seq = 0;  // per-sender sequence number
};

struct NetStats {
  std::uint64_t rounds = 0;
  std::uint64_t messages = 0;
  // (from, to) -> bytes
  std::map<std::pair<int, int>, std::uint64_t> bytes_per_link;
  // innermost scope -> rounds
  std::map<std::string, std::uint64_t> per_primitive;

  std::uint64_t bytes_total() const {
    std::uint64_t sum = 0;
    for (const auto& [link, bytes] : bytes_per_link) sum += bytes;
    return sum;
  }

  friend bool operator==(const NetStats&, const NetStats&) = default;
};

struct TranscriptRecord {
  std::uint64_t round = 0;
  int from = 0;
  int to = 0;
  std::string tag;
  std::size_t byte_len = 0;
  std::vector<std::uint8_t> payload;  // only when payload recording is on

  friend bool operator==(const TranscriptRecord&, const TranscriptRecord&) = default;
};

using Transcript = std::vector<TranscriptRecord>;

struct NetConfig {
  int data_parties = 2;
  std::uint64_t seed = 0;
  ProtocolParams params{};
  bool record_payloads = false;
  // When set, each round's messages are delivered in a seeded random order
  // (per-link FIFO is preserved).
  std::optional<std::uint64_t> delivery_shuffle_seed;
};

inline constexpr std::string_view kUnscoped = "unscoped";

namespace detail {

struct AbortedError {};

class Network {
 public:
  explicit Network(const NetConfig& config)
      : config_(config),
        parties_(config.data_parties + 1),
        mailboxes_(static_cast<std::size_t>(parties_)),
        scopes_(static_cast<std::size_t>(parties_)) {
    if (config.delivery_shuffle_seed) shuffle_rng_.emplace(*config.delivery_shuffle_seed);
  }

  int parties() const { return parties_; }

  void post(Message m) {
    std::lock_guard lock(mu_);
    pending_.push_back(std::move(m));
  }

  // Blocks until every live party has arrived; the last arrival flushes the
  // pending messages as one round.
  void arrive(int party, std::string scope) {
    std::unique_lock lock(mu_);
    if (aborted_) throw AbortedError{};
    if (finished_ > 0) {
      fail_locked(std::make_exception_ptr(ProtocolError(
          "P" + std::to_string(party) + " reached a round barrier in scope '" +
          scope + "' after another party finished its program")));
      throw AbortedError{};
    }
    scopes_[static_cast<std::size_t>(party)] = std::move(scope);
    if (++arrived_ == parties_) {
      try {
        flush_locked();
      } catch (...) {
        fail_locked(std::current_exception());
        throw AbortedError{};
      }
      arrived_ = 0;
      ++generation_;
      cv_.notify_all();
      return;
    }
    const std::uint64_t gen = generation_;
    cv_.wait(lock, [&] { return generation_ != gen || aborted_; });
    if (aborted_) throw AbortedError{};
  }

  void finish(int party) {
    std::lock_guard lock(mu_);
    ++finished_;
    if (arrived_ > 0 && !aborted_) {
      fail_locked(std::make_exception_ptr(ProtocolError(
          "P" + std::to_string(party) +
          " finished while other parties wait at a round barrier")));
    }
  }

  void fail(std::exception_ptr error) {
    std::lock_guard lock(mu_);
    fail_locked(std::move(error));
  }

  std::exception_ptr error() const { return error_; }

  std::deque<RingTensor>* mailbox(int party, int from, const std::string& tag) {
    auto& box = mailboxes_[static_cast<std::size_t>(party)];
    auto it = box.find({from, tag});
    if (it == box.end() || it->second.empty()) return nullptr;
    return &it->second;
  }

  std::uint64_t rounds() const { return rounds_view_.load(std::memory_order_acquire); }

  NetStats take_stats() { return std::move(stats_); }
  Transcript take_transcript() { return std::move(transcript_); }

 private:
  void fail_locked(std::exception_ptr error) {
    if (!error_) error_ = std::move(error);
    aborted_ = true;
    cv_.notify_all();
  }

  void flush_locked() {
    if (pending_.empty()) return;
    for (int i = 1; i < parties_; ++i) {
      if (scopes_[static_cast<std::size_t>(i)] != scopes_[0]) {
        throw ProtocolError("parties disagree on the protocol scope at a round "
                            "barrier: '" + scopes_[0] + "' vs '" +
                            scopes_[static_cast<std::size_t>(i)] + "'");
      }
    }
    std::sort(pending_.begin(), pending_.end(), [](const Message& a, const Message& b) {
      return std::tie(a.from, a.to, a.seq) < std::tie(b.from, b.to, b.seq);
    });
    ++stats_.rounds;
    ++stats_.per_primitive[scopes_[0]];
    for (const auto& m : pending_) {
      ++stats_.messages;
      stats_.bytes_per_link[{m.from.value(), m.to.value()}] += m.payload.size();
      TranscriptRecord rec{stats_.rounds, m.from.value(), m.to.value(), m.tag,
                           m.payload.size(), {}};
      if (config_.record_payloads) rec.payload = m.payload;
      transcript_.push_back(std::move(rec));
    }
    for (const std::size_t i : delivery_order()) {
      Message& m = pending_[i];
      mailboxes_[static_cast<std::size_t>(m.to.value())][{m.from.value(), m.tag}]
          .push_back(wire::decode(m.payload));
    }
    pending_.clear();
    rounds_view_.store(stats_.rounds, std::memory_order_release);
  }

  // Canonical order, or a seeded permutation that keeps each link's messages
  // in send order.
  std::vector<std::size_t> delivery_order() {
    std::vector<std::size_t> order(pending_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    if (!shuffle_rng_) return order;
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[shuffle_rng_->uniform_int(i)]);
    }
    std::map<std::pair<int, int>, std::vector<std::size_t>> slots;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      const Message& m = pending_[order[pos]];
      slots[{m.from.value(), m.to.value()}].push_back(pos);
    }
    std::vector<std::size_t> fixed(order.size());
    for (auto& [link, positions] : slots) {
      std::vector<std::size_t> members;
      for (std::size_t pos : positions) members.push_back(order[pos]);
      std::sort(members.begin(), members.end());  // canonical = send order per link
      for (std::size_t k = 0; k < positions.size(); ++k) fixed[positions[k]] = members[k];
    }
    return fixed;
  }

  const NetConfig& config_;
  const int parties_;
  std::mutex mu_;
  std::condition_variable cv_;
  int arrived_ = 0;
  int finished_ = 0;
  std::uint64_t generation_ = 0;
  bool aborted_ = false;
  std::exception_ptr error_;
  std::vector<Message> pending_;
  std::vector<std::map<std::pair<int, std::string>, std::deque<RingTensor>>> mailboxes_;
  std::vector<std::string> scopes_;
  NetStats stats_;
  Transcript transcript_;
  std::atomic<std::uint64_t> rounds_view_{0};
  std::optional<Rng> shuffle_rng_;
};

}  // namespace detail

class Party;

// RAII attribution scope: rounds flushed while it is the innermost scope are
// charged to its name.
class [[nodiscard]] ScopeGuard {
 public:
  ScopeGuard(Party& party, std::string name);
  ~ScopeGuard();
  ScopeGuard(const ScopeGuard&) = delete;
  ScopeGuard& operator=(const ScopeGuard&) = delete;

 private:
  Party& party_;
};

// A logical party's runtime: its identity, its private randomness and its
// mailbox. The only way to reach another party is send()/recv().
class Party {
 public:
  Party(PartyId id, detail::Network& net, const NetConfig& config)
      : id_(id),
        net_(net),
        config_(config),
        rng_(derive_seed(config.seed, "party:" + std::to_string(id.value()))),
        public_rng_(derive_seed(config.seed, "public")) {
    if (!id.is_dealer()) common_rng_.emplace(derive_seed(config.seed, "data-parties"));
  }

  Party(const Party&) = delete;
  Party& operator=(const Party&) = delete;

  PartyId id() const { return id_; }
  bool is_dealer() const { return id_.is_dealer(); }
  int num_data_parties() const { return config_.data_parties; }
  const ProtocolParams& params() const { return config_.params; }

  std::vector<PartyId> data_parties() const {
    std::vector<PartyId> out;
    for (int j = 1; j <= config_.data_parties; ++j) out.emplace_back(j);
    return out;
  }

  // Own share of a harness-level shared matrix.
  LocalShare mine(const SharedMatrix& m) const { return m.local(id_); }

  void send(PartyId to, std::string_view tag, const RingTensor& payload) {
    if (to == id_) throw ProtocolError(to_string(id_) + " sent a message to itself");
    if (to.value() < 0 || to.value() > config_.data_parties) {
      throw ProtocolError(to_string(id_) + " sent to unknown peer " + to_string(to));
    }
    net_.post(Message{id_, to, std::string(tag), wire::encode(payload), seq_++});
  }

  // Sends to every data party other than this one.
  void send_to_data_parties(std::string_view tag, const RingTensor& payload) {
    for (PartyId j : data_parties()) {
      if (j != id_) send(j, tag, payload);
    }
  }

  // Takes the oldest message with this tag from `from` delivered at an
  // earlier barrier. Messages only arrive at barriers, so a missing message
  // can never show up later: that is a deadlock.
  RingTensor recv(PartyId from, std::string_view tag) {
    std::string key(tag);
    auto* box = net_.mailbox(id_.value(), from.value(), key);
    if (box == nullptr) {
      throw DeadlockError(to_string(id_) + " blocked on message '" + key +
                              "' from " + to_string(from) + " that was never sent",
                          key);
    }
    RingTensor t = std::move(box->front());
    box->pop_front();
    return t;
  }

  void barrier() {
    net_.arrive(id_.value(),
                scopes_.empty() ? std::string(kUnscoped) : scopes_.back());
  }

  // Rounds completed so far in this session (same value at every party
  // between barriers).
  std::uint64_t rounds() const { return net_.rounds(); }

  Rng& rng() { return rng_; }
  Rng& public_rng() { return public_rng_; }
  Rng& common_rng() {
    if (!common_rng_) {
      throw ConfinementError("the dealer has no access to the data parties' "
                             "common randomness");
    }
    return *common_rng_;
  }

  ScopeGuard scope(std::string name) { return ScopeGuard(*this, std::move(name)); }
  const std::string& current_scope() const {
    static const std::string unscoped(kUnscoped);
    return scopes_.empty() ? unscoped : scopes_.back();
  }

  // Rejects a share that belongs to another party.
  void check_owned(const LocalShare& s) const {
    if (s.owner() != id_) {
      throw ConfinementError(to_string(id_) + " used a share owned by " +
                             to_string(s.owner()));
    }
  }

 private:
  friend class ScopeGuard;

  PartyId id_;
  detail::Network& net_;
  const NetConfig& config_;
  Rng rng_;
  Rng public_rng_;
  std::optional<Rng> common_rng_;
  std::vector<std::string> scopes_;
  std::uint64_t seq_ = 0;
};

inline ScopeGuard::ScopeGuard(Party& party, std::string name) : party_(party) {
  party_.scopes_.push_back(std::move(name));
}
inline ScopeGuard::~ScopeGuard() { party_.scopes_.pop_back(); }

template <class R>
struct ProtocolRun {
  std::vector<R> outputs;  // index = party id, 0 is the dealer
  NetStats stats;
  Transcript transcript;
};

// Runs `program` once per party (dealer included), each on its own thread,
// and returns every party's output with the metered statistics. The first
// failure aborts all parties and is rethrown here.
template <class Program>
auto run_protocol(const NetConfig& config, Program&& program)
    -> ProtocolRun<std::invoke_result_t<Program&, Party&>> {
  using R = std::invoke_result_t<Program&, Party&>;
  static_assert(!std::is_void_v<R>, "protocol programs must return a value");
  if (config.data_parties < 2) {
    throw std::invalid_argument("run_protocol: at least 2 data parties required");
  }
  config.params.validate();

  detail::Network net(config);
  const int n = net.parties();
  std::vector<std::optional<R>> outputs(static_cast<std::size_t>(n));
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(n));
  for (int id = 0; id < n; ++id) {
    workers.emplace_back([&, id] {
      Party party(PartyId(id), net, config);
      try {
        outputs[static_cast<std::size_t>(id)].emplace(program(party));
        net.finish(id);
      } catch (const detail::AbortedError&) {
      } catch (...) {
        net.fail(std::current_exception());
      }
    });
  }
  for (auto& w : workers) w.join();
  if (auto error = net.error()) std::rethrow_exception(error);

  ProtocolRun<R> run;
  run.outputs.reserve(outputs.size());
  for (auto& o : outputs) run.outputs.push_back(std::move(*o));
  run.stats = net.take_stats();
  run.transcript = net.take_transcript();
  return run;
}

}  // namespace ppkm
