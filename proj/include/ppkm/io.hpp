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
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "ppkm/session.hpp"

// File formats: dataset CSV, SKM1 share/column files, model and stats JSON,
// and JSON-lines transcripts.

namespace ppkm::io {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// CSV: header x1,...,xd[,label], one row per sample.

inline PlainDataset read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  PlainDataset ds;
  if (!std::getline(in, line)) {
    ds.points = Matrix(0, 0);
    return ds;
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  const bool labeled = !header.empty() && header.back() == "label";
  const std::size_t d = header.size() - (labeled ? 1 : 0);
  if (d == 0) throw DataError(path.string() + ": header names no feature columns");

  std::vector<double> values;
  std::vector<std::size_t> labels;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row;
    std::stringstream ss(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(ss, cell, ',')) {
      if (col >= header.size()) {
        col = header.size() + 1;
        break;
      }
      try {
        std::size_t used = 0;
        if (labeled && col == d) {
          const long long v = std::stoll(cell, &used);
          if (v < 0) throw std::invalid_argument("negative");
          labels.push_back(static_cast<std::size_t>(v));
        } else {
          const double v = std::stod(cell, &used);
          if (!std::isfinite(v)) throw std::invalid_argument("non-finite");
          values.push_back(v);
        }
        if (used != cell.size()) throw std::invalid_argument("trailing text");
      } catch (const std::exception&) {
        throw DataError(path.string() + ": row " + std::to_string(row) + ", column " +
                        std::to_string(col + 1) + ": bad value '" + cell + "'");
      }
      ++col;
    }
    if (col != header.size() || line.back() == ',') {
      throw DataError(path.string() + ": row " + std::to_string(row) + " has the wrong " +
                      "number of fields");
    }
  }
  ds.points = Matrix(row, d, std::move(values));
  if (labeled) ds.labels = std::move(labels);
  return ds;
}

inline void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

inline std::ofstream open_out(const fs::path& path, std::ios::openmode mode = {}) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::out | std::ios::trunc | mode);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

inline std::string format_real(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline void write_csv(const fs::path& path, const Matrix& points,
                      const std::vector<std::size_t>* labels = nullptr) {
  auto out = open_out(path);
  for (std::size_t c = 0; c < points.cols(); ++c) out << (c ? ",x" : "x") << c + 1;
  if (labels) out << (points.cols() ? ",label" : "label");
  out << '\n';
  for (std::size_t i = 0; i < points.rows(); ++i) {
    for (std::size_t c = 0; c < points.cols(); ++c) {
      out << (c ? "," : "") << format_real(points(i, c));
    }
    if (labels) out << ',' << (*labels)[i];
    out << '\n';
  }
}

inline void write_labels(const fs::path& path, const std::vector<std::size_t>& labels) {
  auto out = open_out(path);
  out << "label\n";
  for (std::size_t l : labels) out << l << '\n';
}

// ---------------------------------------------------------------------------
// SKM1: "SKM1", u32 rows, u32 cols, u32 frac_bits, then rows*cols
// little-endian u64 ring values.

inline constexpr char kShareMagic[4] = {'S', 'K', 'M', '1'};

inline void write_share_file(const fs::path& path, const RingTensor& t, int frac_bits) {
  if (t.rank() != 2) throw ShapeError("share file: expected a matrix");
  std::vector<std::uint8_t> buf(kShareMagic, kShareMagic + 4);
  wire::put_u32(buf, static_cast<std::uint32_t>(t.rows()));
  wire::put_u32(buf, static_cast<std::uint32_t>(t.cols()));
  wire::put_u32(buf, static_cast<std::uint32_t>(frac_bits));
  for (RingValue v : t.values()) {
    for (int b = 0; b < 8; ++b) buf.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
  }
  auto out = open_out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

struct ShareFile {
  RingTensor values;
  int frac_bits = 0;
};

inline ShareFile read_share_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(in)),
                                std::istreambuf_iterator<char>());
  if (buf.size() < 16 || !std::equal(kShareMagic, kShareMagic + 4, buf.begin())) {
    throw DataError(path.string() + ": not an SKM1 share file");
  }
  const std::span<const std::uint8_t> bytes(buf);
  const std::size_t rows = wire::get_u32(bytes, 4);
  const std::size_t cols = wire::get_u32(bytes, 8);
  const int frac = static_cast<int>(wire::get_u32(bytes, 12));
  if (buf.size() != 16 + 8 * rows * cols) {
    throw DataError(path.string() + ": truncated share file");
  }
  RingTensor t({rows, cols});
  for (std::size_t i = 0; i < rows * cols; ++i) {
    RingValue v = 0;
    for (int b = 0; b < 8; ++b) v |= RingValue{buf[16 + 8 * i + b]} << (8 * b);
    t[i] = v;
  }
  return {std::move(t), frac};
}

// ---------------------------------------------------------------------------
// Model: <stem>.json plus one <stem>.P<j>.skm1 per data party. Horizontal
// files hold center shares; vertical files hold that party's own center
// columns encoded at the codec scale.

inline json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    rows.push_back(std::vector<double>(m.row(i).begin(), m.row(i).end()));
  }
  return rows;
}

inline Matrix matrix_from_json(const json& j) {
  const std::size_t rows = j.size();
  const std::size_t cols = rows ? j[0].size() : 0;
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (j[i].size() != cols) throw DataError("ragged matrix in JSON");
    for (std::size_t c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

inline fs::path share_path(const fs::path& model_json, int party) {
  fs::path p = model_json;
  p.replace_extension();
  return p.string() + ".P" + std::to_string(party) + ".skm1";
}

inline void save_model(const fs::path& path, const ClusterModel& m, bool reveal_centers) {
  json j;
  j["format"] = "ppkm-model/1";
  j["mode"] = to_string(m.mode);
  j["k"] = m.k;
  j["d"] = m.d;
  j["epsilon"] = m.epsilon;
  j["frac_bits"] = m.frac_bits;
  j["parties"] = m.parties();
  j["iterations"] = m.iterations;
  j["converged"] = m.converged;
  j["init_indices"] = m.init_indices;
  j["t_history"] = m.t_history;
  json files = json::array();
  for (int p = 1; p <= m.parties(); ++p) {
    const fs::path sp = share_path(path, p);
    files.push_back(sp.filename().string());
    if (m.mode == ClusterMode::kHorizontal) {
      write_share_file(sp, m.centers.share(PartyId(p)), m.centers.frac_bits());
    } else {
      const FixedCodec codec(m.frac_bits);
      write_share_file(sp, encode(m.center_blocks[static_cast<std::size_t>(p - 1)], codec),
                       m.frac_bits);
    }
  }
  j["party_files"] = files;
  if (m.mode == ClusterMode::kVertical) {
    json ranges = json::array();
    for (const auto& r : m.column_ranges) ranges.push_back({r.begin, r.end});
    j["column_ranges"] = ranges;
  }
  if (reveal_centers) j["centers"] = matrix_json(m.open_centers());
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

inline ClusterModel load_model(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  try {
    ClusterModel m;
    const std::string mode = j.at("mode");
    if (mode != "horizontal" && mode != "vertical") throw DataError("unknown mode " + mode);
    m.mode = mode == "horizontal" ? ClusterMode::kHorizontal : ClusterMode::kVertical;
    m.k = j.at("k");
    m.d = j.at("d");
    m.epsilon = j.at("epsilon");
    m.frac_bits = j.at("frac_bits");
    m.iterations = j.at("iterations");
    m.converged = j.at("converged");
    m.init_indices = j.at("init_indices").get<std::vector<std::size_t>>();
    m.t_history = j.at("t_history").get<std::vector<std::vector<std::uint64_t>>>();
    const auto files = j.at("party_files").get<std::vector<std::string>>();
    std::vector<RingTensor> shares;
    for (std::size_t p = 0; p < files.size(); ++p) {
      ShareFile sf = read_share_file(path.parent_path() / files[p]);
      if (sf.frac_bits != m.frac_bits) throw DataError(files[p] + ": scale mismatch");
      if (m.mode == ClusterMode::kHorizontal) {
        if (sf.values.rows() != m.k || sf.values.cols() != m.d) {
          throw DataError(files[p] + ": wrong center shape");
        }
        shares.push_back(std::move(sf.values));
      } else {
        m.center_blocks.push_back(decode(sf.values, sf.frac_bits));
      }
    }
    if (m.mode == ClusterMode::kHorizontal) {
      m.centers = SharedMatrix(std::move(shares), m.frac_bits);
    } else {
      for (const auto& r : j.at("column_ranges")) {
        m.column_ranges.push_back({r.at(0).get<std::size_t>(), r.at(1).get<std::size_t>()});
      }
      if (m.column_ranges.size() != m.center_blocks.size()) {
        throw DataError("column_ranges does not match the party files");
      }
      for (std::size_t p = 0; p < m.center_blocks.size(); ++p) {
        if (m.center_blocks[p].rows() != m.k ||
            m.center_blocks[p].cols() != m.column_ranges[p].size()) {
          throw DataError(files[p] + ": wrong center block shape");
        }
      }
    }
    return m;
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Stats and transcripts

inline json per_primitive_json(const NetStats& s) {
  json j = json::object();
  for (const auto& [name, rounds] : s.per_primitive) j[name] = rounds;
  return j;
}

inline json bytes_per_link_json(const NetStats& s) {
  json j = json::object();
  for (const auto& [link, bytes] : s.bytes_per_link) {
    j["P" + std::to_string(link.first) + "->P" + std::to_string(link.second)] = bytes;
  }
  return j;
}

struct StatsExtras {
  std::string mode;  // plain | shk | svk
  std::string division;
  std::size_t k = 0;
  int parties = 0;
  std::uint64_t seed = 0;
  double final_inertia = 0.0;
};

inline json stats_json(const TrainingRun& run, const StatsExtras& x) {
  json j;
  j["mode"] = x.mode;
  if (!x.division.empty()) j["division"] = x.division;
  j["k"] = x.k;
  j["parties"] = x.parties;
  j["seed"] = x.seed;
  j["iterations"] = run.model.iterations;
  j["converged"] = run.model.converged;
  j["rounds_total"] = run.stats.rounds;
  j["setup_rounds"] = run.setup_rounds;
  j["rounds_per_iteration"] = run.rounds_per_iteration;
  j["bytes_total"] = run.stats.bytes_total();
  j["messages"] = run.stats.messages;
  j["bytes_per_link"] = bytes_per_link_json(run.stats);
  j["per_primitive"] = per_primitive_json(run.stats);
  j["revealed_values"] = run.model.t_history;
  j["final_inertia"] = x.final_inertia;
  return j;
}

inline void write_json(const fs::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

inline std::string hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s;
  s.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    s.push_back(kDigits[b >> 4]);
    s.push_back(kDigits[b & 15]);
  }
  return s;
}

inline void write_transcript(const fs::path& path, const Transcript& t) {
  auto out = open_out(path);
  for (const auto& r : t) {
    json j{{"round", r.round}, {"from", r.from}, {"to", r.to}, {"tag", r.tag},
           {"byte_len", r.byte_len}};
    if (!r.payload.empty()) j["payload"] = hex(r.payload);
    out << j.dump() << '\n';
  }
}

}  // namespace ppkm::io
