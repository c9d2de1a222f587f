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

// ppkm: command-line front end for data generation, training, prediction,
// round accounting and the Alice/Bob demo.

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ppkm.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ppkm;

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNoConvergence = 3 };

struct Settings {
  std::uint64_t seed = 7;
  int parties = 2;
  int frac_bits = FixedCodec::kDefaultFracBits;
  int drelu_rounds = 8;
  int division_rounds = 130;
  int mask_bits = 9;

  ProtocolParams params() const {
    ProtocolParams p;
    p.codec = FixedCodec(frac_bits);
    p.cost.drelu_rounds = drelu_rounds;
    p.cost.argmin_rounds_per_step = drelu_rounds + 1;
    p.cost.division_rounds = division_rounds;
    p.compare_mask_bits = mask_bits;
    p.validate();
    return p;
  }

  NetConfig net(std::uint64_t session_seed) const {
    NetConfig cfg;
    cfg.data_parties = parties;
    cfg.seed = session_seed;
    cfg.params = params();
    return cfg;
  }
};

void add_protocol_options(CLI::App& cmd, Settings& s) {
  cmd.add_option("--parties,-p", s.parties, "Number of data parties")
      ->check(CLI::Range(2, 64))
      ->capture_default_str();
  cmd.add_option("--frac-bits", s.frac_bits, "Fixed-point fractional bits")
      ->check(CLI::Range(1, 30))
      ->capture_default_str();
  cmd.add_option("--drelu-rounds", s.drelu_rounds, "Round cost of one comparison")
      ->capture_default_str();
  cmd.add_option("--division-rounds", s.division_rounds, "Round cost of secure division")
      ->capture_default_str();
  cmd.add_option("--mask-bits", s.mask_bits, "Comparison mask width")
      ->capture_default_str();
}

std::vector<std::size_t> even_sizes(std::size_t total, int parts) {
  std::vector<std::size_t> sizes;
  const auto p = static_cast<std::size_t>(parts);
  for (std::size_t j = 0; j < p; ++j) sizes.push_back(total / p + (j < total % p ? 1 : 0));
  return sizes;
}

PlainDataset load_data(const std::string& path) {
  PlainDataset ds = io::read_csv(path);
  if (ds.size() == 0) throw DataError(path + ": no data rows");
  return ds;
}

// ---------------------------------------------------------------------------

struct GenDataArgs {
  std::string out = "data";
  std::string split;
};

int cmd_gen_data(const Settings& s, const GenDataArgs& a) {
  const PlainDataset ds = gen_gaussian_mixture(s.seed);
  const fs::path dir(a.out);
  io::write_csv(dir / "full.csv", ds.points, &*ds.labels);
  std::cout << "wrote " << (dir / "full.csv").string() << " (" << ds.size() << " rows)\n";
  if (a.split.empty()) return kOk;

  const PartitionSpec spec = PartitionSpec::parse(a.split);
  const auto parts = split(ds.points, spec);
  for (std::size_t j = 0; j < parts.size(); ++j) {
    const fs::path file = dir / ("party" + std::to_string(j + 1) + ".csv");
    if (spec.mode == PartitionMode::kHorizontal) {
      const auto& r = spec.ranges[j];
      const std::vector<std::size_t> labels(ds.labels->begin() + static_cast<long>(r.begin),
                                            ds.labels->begin() + static_cast<long>(r.end));
      io::write_csv(file, parts[j], &labels);
    } else {
      io::write_csv(file, parts[j]);
    }
    std::cout << "wrote " << file.string() << " (" << parts[j].rows() << "x"
              << parts[j].cols() << ")\n";
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct RunArgs {
  std::string mode = "shk";
  std::string data;
  std::vector<std::string> party_data;
  std::string split;
  std::size_t k = 4;
  double epsilon = 1e-4;
  std::string division = "fast";
  std::size_t max_iters = 100;
  std::string empty_policy = "keep";
  std::string model = "model.json";
  std::string stats = "stats.json";
  std::string labels;
  std::string transcript;
  bool record_payloads = false;
  bool reveal_centers = false;
};

// Per-party fragments plus the reassembled plaintext (for the inertia report).
struct Fragments {
  std::vector<Matrix> parts;
  Matrix full;
};

Fragments gather_fragments(const Settings& s, const RunArgs& a, PartitionMode mode) {
  Fragments f;
  if (!a.party_data.empty()) {
    if (!a.data.empty()) throw ConfigError("use either --data or --party-data, not both");
    if (a.party_data.size() != static_cast<std::size_t>(s.parties)) {
      throw ConfigError("--party-data lists " + std::to_string(a.party_data.size()) +
                        " files for " + std::to_string(s.parties) + " parties");
    }
    std::vector<std::size_t> sizes;
    for (const auto& file : a.party_data) {
      f.parts.push_back(load_data(file).points);
      sizes.push_back(mode == PartitionMode::kHorizontal ? f.parts.back().rows()
                                                         : f.parts.back().cols());
    }
    f.full = reassemble(f.parts, PartitionSpec::from_sizes(mode, sizes));
    return f;
  }
  if (a.data.empty()) throw ConfigError("--data or --party-data is required");
  f.full = load_data(a.data).points;
  PartitionSpec spec;
  if (a.split.empty()) {
    const std::size_t extent = mode == PartitionMode::kHorizontal ? f.full.rows() : f.full.cols();
    if (extent < static_cast<std::size_t>(s.parties)) {
      throw DataError("cannot give each of " + std::to_string(s.parties) + " parties a " +
                      (mode == PartitionMode::kHorizontal ? "row" : "column"));
    }
    spec = PartitionSpec::from_sizes(mode, even_sizes(extent, s.parties));
  } else {
    spec = PartitionSpec::parse(a.split);
    if (spec.mode != mode) {
      throw ConfigError("--split mode " + std::string(to_string(spec.mode)) +
                        " does not fit --mode " + a.mode);
    }
    if (spec.parties() != static_cast<std::size_t>(s.parties)) {
      throw ConfigError("--split names " + std::to_string(spec.parties()) +
                        " parties, --parties is " + std::to_string(s.parties));
    }
  }
  f.parts = split(f.full, spec);
  return f;
}

KMeansOptions kmeans_options(const Settings& s, const RunArgs& a) {
  KMeansOptions o;
  o.k = a.k;
  o.epsilon = a.epsilon;
  o.max_iters = a.max_iters;
  o.division = a.division == "secure" ? DivisionMode::kSecure : DivisionMode::kFast;
  o.empty_policy =
      a.empty_policy == "reseed" ? EmptyClusterPolicy::kReseed : EmptyClusterPolicy::kKeep;
  o.reseed_seed = derive_seed(s.seed, "reseed");
  return o;
}

int cmd_run(const Settings& s, const RunArgs& a) {
  const KMeansOptions opt = kmeans_options(s, a);
  io::StatsExtras extras;
  extras.mode = a.mode;
  extras.k = a.k;
  extras.seed = s.seed;

  if (a.mode == "plain") {
    if (a.data.empty()) throw ConfigError("plain mode needs --data");
    const Matrix x = load_data(a.data).points;
    opt.validate(x.rows());
    // Same public stream as a secure session with this seed, so plain and
    // secure runs start from the same rows.
    Rng init(derive_seed(derive_seed(s.seed, "session"), "public"));
    PlainKMeansOptions po;
    po.k = opt.k;
    po.epsilon = opt.epsilon;
    po.max_iters = opt.max_iters;
    po.empty_policy = opt.empty_policy;
    po.reseed_seed = opt.reseed_seed;
    po.init_indices = draw_init_indices(init, x.rows(), opt.k);
    const PlainKMeansResult r = plain_kmeans(x, po);

    TrainingRun tr;
    tr.model.k = opt.k;
    tr.model.d = x.cols();
    tr.model.iterations = r.iterations;
    tr.model.converged = r.converged;
    for (const auto& t : r.t_history) tr.model.t_history.emplace_back(t.begin(), t.end());
    tr.rounds_per_iteration.assign(r.iterations, 0);
    extras.parties = 1;
    extras.final_inertia = r.inertia.empty() ? 0.0 : r.inertia.back();
    json stats = io::stats_json(tr, extras);
    io::write_json(a.stats, stats);
    json model{{"format", "ppkm-model/1"}, {"mode", "plain"},     {"k", opt.k},
               {"d", x.cols()},           {"epsilon", opt.epsilon}, {"iterations", r.iterations},
               {"converged", r.converged}, {"init_indices", po.init_indices},
               {"centers", io::matrix_json(r.centers)}};
    io::write_json(a.model, model);
    if (!a.labels.empty()) io::write_labels(a.labels, r.labels);
    std::cout << "plain k-means: " << r.iterations << " iterations, inertia "
              << extras.final_inertia << "\n";
    return r.converged ? kOk : kNoConvergence;
  }

  const bool vertical = a.mode == "svk";
  const Fragments frags =
      gather_fragments(s, a, vertical ? PartitionMode::kVertical : PartitionMode::kHorizontal);
  NetConfig cfg = s.net(derive_seed(s.seed, "session"));
  cfg.record_payloads = a.record_payloads;
  TrainingRun run = vertical ? run_svk_means(frags.parts, opt, cfg)
                             : run_shk_means(frags.parts, opt, cfg);

  const Matrix centers = run.model.open_centers();
  extras.parties = s.parties;
  if (!vertical) extras.division = a.division;
  extras.final_inertia = inertia(frags.full, centers, nearest_centers(frags.full, centers));
  io::write_json(a.stats, io::stats_json(run, extras));
  io::save_model(a.model, run.model, a.reveal_centers);
  if (!a.labels.empty()) io::write_labels(a.labels, run.labels);
  if (!a.transcript.empty()) io::write_transcript(a.transcript, run.transcript);

  std::cout << a.mode << ": " << run.model.iterations << " iterations, "
            << run.stats.rounds << " rounds";
  if (!run.rounds_per_iteration.empty()) {
    std::cout << " (" << run.rounds_per_iteration.front() << " per iteration)";
  }
  std::cout << ", " << run.stats.bytes_total() << " bytes\n";
  if (!run.model.converged) {
    std::cerr << "warning: no convergence after " << a.max_iters
              << " iterations; partial model written\n";
    return kNoConvergence;
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct PredictArgs {
  std::string model;
  std::string data;
  int owner = 0;
  std::string out = "labels.csv";
};

int cmd_predict(const Settings& s, const PredictArgs& a) {
  const ClusterModel model = io::load_model(a.model);
  const PlainDataset ds = io::read_csv(a.data);
  if (ds.size() == 0) {
    io::write_labels(a.out, {});
    std::cout << "no rows to label\n";
    return kOk;
  }
  if (ds.dims() != model.d) {
    throw DataError(a.data + " has " + std::to_string(ds.dims()) + " columns, model has " +
                    std::to_string(model.d));
  }
  Settings ss = s;
  ss.parties = model.parties();
  ss.frac_bits = model.frac_bits;
  const NetConfig cfg = ss.net(derive_seed(s.seed, "predict"));

  PredictionRun pr;
  if (model.mode == ClusterMode::kHorizontal) {
    const int owner = a.owner == 0 ? ss.parties : a.owner;
    if (owner < 1 || owner > ss.parties) {
      throw ConfigError("--owner must name a data party in [1, " +
                        std::to_string(ss.parties) + "]");
    }
    std::vector<Matrix> parts(static_cast<std::size_t>(ss.parties), Matrix(0, model.d));
    parts[static_cast<std::size_t>(owner - 1)] = ds.points;
    pr = run_shk_predict(model, parts, cfg);
  } else {
    std::vector<std::size_t> widths;
    for (const auto& r : model.column_ranges) widths.push_back(r.size());
    const auto parts =
        split(ds.points, PartitionSpec::from_sizes(PartitionMode::kVertical, widths));
    pr = run_svk_predict(model, parts, cfg);
  }
  io::write_labels(a.out, pr.labels);
  std::cout << "labeled " << pr.labels.size() << " rows in " << pr.stats.rounds
            << " rounds\n";
  return kOk;
}

// ---------------------------------------------------------------------------

struct ReportArgs {
  std::vector<std::size_t> ks{2, 3, 4, 8};
  std::string format = "csv";
  std::string out;
};

struct ReportRow {
  std::size_t k;
  std::string protocol;
  std::uint64_t measured;
  std::uint64_t formula;
};

std::uint64_t measure_rounds(const NetConfig& cfg, const auto& body) {
  const auto run = run_protocol(cfg, [&](Party& ctx) {
    const std::uint64_t start = ctx.rounds();
    body(ctx);
    return ctx.rounds() - start;
  });
  return run.outputs[1];
}

std::vector<ReportRow> rounds_report(const Settings& s, const std::vector<std::size_t>& ks) {
  const CostModel cost = s.params().cost;
  const auto dr = static_cast<std::uint64_t>(cost.drelu_rounds);
  const auto div = static_cast<std::uint64_t>(cost.division_rounds);
  const PlainDataset ds = gen_gaussian_mixture(s.seed);
  const NetConfig cfg = s.net(derive_seed(s.seed, "rounds-report"));
  Rng rng(derive_seed(s.seed, "rounds-report-shares"));
  const SharedMatrix x = share(ds.points, s.parties, rng, cfg.params.codec);
  const auto hparts =
      split(ds.points, PartitionSpec::from_sizes(PartitionMode::kHorizontal,
                                                 even_sizes(ds.size(), s.parties)));

  std::vector<ReportRow> rows;
  for (std::size_t k : ks) {
    const Matrix c0 = gather_rows(ds.points, Rng(k).sample_distinct(ds.size(), k));
    const SharedMatrix c = share(c0, s.parties, rng, cfg.params.codec);
    rows.push_back({k, "ElementWiseMatMul",
                    measure_rounds(cfg, [&](Party& ctx) {
                      element_wise_mat_mul(ctx, ctx.mine(c), ctx.mine(c));
                    }),
                    2});
    rows.push_back({k, "MatDist",
                    measure_rounds(cfg, [&](Party& ctx) {
                      mat_dist(ctx, ctx.mine(x), ctx.mine(c));
                    }),
                    2});
    rows.push_back({k, "LabelSamples",
                    measure_rounds(cfg, [&](Party& ctx) {
                      label_samples(ctx, ctx.mine(x), ctx.mine(c));
                    }),
                    2 * k + dr});
    KMeansOptions o;
    o.k = k;
    o.max_iters = 1;
    TrainingRun fast = run_shk_means(hparts, o, cfg);
    rows.push_back({k, "SHK-means (fast division)", fast.rounds_per_iteration.at(0),
                    2 * k + 4 + 2 * dr});
    o.division = DivisionMode::kSecure;
    TrainingRun secure = run_shk_means(hparts, o, cfg);
    rows.push_back({k, "SHK-means (secure division)", secure.rounds_per_iteration.at(0),
                    2 * k + 4 + 2 * dr + div});
    if (static_cast<std::size_t>(s.parties) <= ds.dims()) {
      const auto vparts = split(ds.points, PartitionSpec::from_sizes(
                                               PartitionMode::kVertical,
                                               even_sizes(ds.dims(), s.parties)));
      o.division = DivisionMode::kFast;
      TrainingRun svk = run_svk_means(vparts, o, cfg);
      rows.push_back({k, "SVK-means", svk.rounds_per_iteration.at(0), (dr + 1) * k});
    }
  }
  return rows;
}

int cmd_rounds_report(const Settings& s, const ReportArgs& a) {
  const auto rows = rounds_report(s, a.ks);
  bool all_match = true;
  std::string text;
  if (a.format == "json") {
    json j = json::array();
    for (const auto& r : rows) {
      j.push_back({{"k", r.k},
                   {"protocol", r.protocol},
                   {"measured", r.measured},
                   {"formula", r.formula},
                   {"diff", static_cast<std::int64_t>(r.measured) -
                                static_cast<std::int64_t>(r.formula)}});
      all_match = all_match && r.measured == r.formula;
    }
    text = j.dump(2) + "\n";
  } else {
    text = "k,protocol,measured,formula,diff\n";
    for (const auto& r : rows) {
      text += std::to_string(r.k) + "," + r.protocol + "," + std::to_string(r.measured) + "," +
              std::to_string(r.formula) + "," +
              std::to_string(static_cast<std::int64_t>(r.measured) -
                             static_cast<std::int64_t>(r.formula)) +
              "\n";
      all_match = all_match && r.measured == r.formula;
    }
  }
  if (a.out.empty()) {
    std::cout << text;
  } else {
    io::open_out(a.out) << text;
  }
  if (!all_match) std::cerr << "warning: measured rounds differ from the cost formulas\n";
  return kOk;
}

// ---------------------------------------------------------------------------

struct DemoArgs {
  std::string mode = "horizontal";
  std::string out = "demo";
  std::string division = "fast";
};

int cmd_demo(const Settings& s, const DemoArgs& a) {
  DemoOptions o;
  o.mode = a.mode == "vertical" ? PartitionMode::kVertical : PartitionMode::kHorizontal;
  o.seed = s.seed;
  o.division = a.division == "secure" ? DivisionMode::kSecure : DivisionMode::kFast;
  o.params = s.params();
  const DemoReport r = train_alice_test_bob_demo(o);

  const fs::path dir(a.out);
  io::write_csv(dir / "data.csv", r.data.points, &r.ground_truth);
  io::write_labels(dir / "ground_truth.csv", r.ground_truth);
  io::write_labels(dir / "alice_labels.csv", r.alice_labels);
  io::write_labels(dir / "secure_labels.csv", r.secure_labels);
  io::write_labels(dir / "full_plain_labels.csv", r.full_plain_labels);
  io::write_csv(dir / "alice_centers.csv", r.alice_centers);
  json report{{"mode", to_string(r.mode)},
              {"seed", s.seed},
              {"split", r.spec.str()},
              {"alice_centers", io::matrix_json(r.alice_centers)},
              {"full_centers", io::matrix_json(r.full_centers)},
              {"secure_centers", io::matrix_json(r.secure_centers)},
              {"alice_truth_agreement", r.alice_truth_agreement},
              {"secure_plain_agreement", r.secure_plain_agreement},
              {"secure_rounds", r.secure_stats.rounds}};
  if (o.mode == PartitionMode::kHorizontal) report["alice_mislabel_rate"] = r.alice_mislabel_rate;
  io::write_json(dir / "report.json", report);

  std::cout << to_string(r.mode) << " demo (" << r.spec.str() << ")\n";
  if (o.mode == PartitionMode::kHorizontal) {
    std::cout << "  Alice-only model mislabels " << 100.0 * r.alice_mislabel_rate
              << "% of Bob's rows\n";
  }
  std::cout << "  Alice-only agreement with ground truth: " << 100.0 * r.alice_truth_agreement
            << "%\n"
            << "  secure run agreement with full-data plaintext: "
            << 100.0 * r.secure_plain_agreement << "%\n"
            << "  outputs in " << dir.string() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Privacy-preserving k-means over additive secret sharing (simulated parties)"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  app.set_config("--config", "", "TOML config file (flags override it)");
  bool print_config = false;
  app.add_flag("--print-config", print_config, "Print the resolved configuration and exit")
      ->configurable(false);

  Settings settings;
  app.add_option("--seed", settings.seed, "Root seed")
      ->envname("PPKM_SEED")
      ->capture_default_str();

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Write the four-Gaussian dataset as CSV");
  gen_cmd->add_option("--out,-o", gen.out, "Output directory")->capture_default_str();
  gen_cmd->add_option("--split", gen.split, "Partition, e.g. horizontal:200,200 or vertical:1,1");

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Train a model");
  run_cmd->add_option("--mode,-m", run.mode, "plain | shk | svk")
      ->check(CLI::IsMember({"plain", "shk", "svk"}))
      ->capture_default_str();
  run_cmd->add_option("--data,-d", run.data, "Full dataset CSV (split among the parties)");
  run_cmd->add_option("--party-data", run.party_data, "One CSV per data party, in order")
      ->delimiter(',');
  run_cmd->add_option("--split", run.split, "Partition of --data across parties");
  run_cmd->add_option("--k,-k", run.k, "Number of clusters")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  run_cmd->add_option("--epsilon", run.epsilon, "Stopping threshold on total center movement")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  run_cmd->add_option("--division", run.division, "fast | secure (SHK only)")
      ->check(CLI::IsMember({"fast", "secure"}))
      ->capture_default_str();
  run_cmd->add_option("--max-iters", run.max_iters, "Iteration cap")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  run_cmd->add_option("--empty-policy", run.empty_policy, "keep | reseed")
      ->check(CLI::IsMember({"keep", "reseed"}))
      ->capture_default_str();
  run_cmd->add_option("--model", run.model, "Model JSON output")->capture_default_str();
  run_cmd->add_option("--stats", run.stats, "Stats JSON output")->capture_default_str();
  run_cmd->add_option("--labels", run.labels, "Final training labels CSV output");
  run_cmd->add_option("--transcript", run.transcript, "Message transcript (JSON lines)");
  run_cmd->add_flag("--record-payloads", run.record_payloads,
                    "Include message payloads in the transcript");
  run_cmd->add_flag("--reveal-centers", run.reveal_centers,
                    "Store opened centers in the model file (all parties consent)");
  add_protocol_options(*run_cmd, settings);

  PredictArgs pred;
  auto* pred_cmd = app.add_subcommand("predict", "Label new rows with a trained model");
  pred_cmd->add_option("--model", pred.model, "Model JSON")->required();
  pred_cmd->add_option("--data,-d", pred.data, "New rows CSV")->required();
  pred_cmd->add_option("--owner", pred.owner,
                       "Data party that holds the rows (horizontal; default: last)");
  pred_cmd->add_option("--out,-o", pred.out, "Labels CSV output")->capture_default_str();
  add_protocol_options(*pred_cmd, settings);

  ReportArgs rep;
  auto* rep_cmd = app.add_subcommand("rounds-report", "Measured vs formula round counts");
  rep_cmd->add_option("--k", rep.ks, "Cluster counts")->delimiter(',')->capture_default_str();
  rep_cmd->add_option("--format", rep.format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  rep_cmd->add_option("--out,-o", rep.out, "Output file (default: stdout)");
  add_protocol_options(*rep_cmd, settings);

  DemoArgs demo;
  auto* demo_cmd = app.add_subcommand("demo", "Alice-only training vs secure training");
  demo_cmd->add_option("--mode,-m", demo.mode, "horizontal | vertical")
      ->check(CLI::IsMember({"horizontal", "vertical"}))
      ->capture_default_str();
  demo_cmd->add_option("--out,-o", demo.out, "Output directory")->capture_default_str();
  demo_cmd->add_option("--division", demo.division, "fast | secure")
      ->check(CLI::IsMember({"fast", "secure"}))
      ->capture_default_str();
  add_protocol_options(*demo_cmd, settings);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }
  if (print_config) {
    std::cout << app.config_to_str(true, false);
    return kOk;
  }

  try {
    settings.params();  // validate before any protocol starts
    if (*gen_cmd) return cmd_gen_data(settings, gen);
    if (*run_cmd) return cmd_run(settings, run);
    if (*pred_cmd) return cmd_predict(settings, pred);
    if (*rep_cmd) {
      for (std::size_t k : rep.ks) {
        if (k == 0) throw ConfigError("--k values must be positive");
      }
      return cmd_rounds_report(settings, rep);
    }
    if (*demo_cmd) return cmd_demo(settings, demo);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const RangeError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const ShapeError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kData;
  }
  return kUsage;
}
