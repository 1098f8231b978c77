/*
 * Copyright 2026 The nullstat Authors.
 *
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

// nullstat command-line interface.
//
//   nullstat calibrate    --stats ref.csv --out model.nsc
//   nullstat infer        --model model.nsc --stats test.csv [--alpha 0.05]
//   nullstat evaluate     --results ours=results.csv [--generators gens.csv]
//   nullstat simulate     --preset lemma-check --out real.csv [--out-fake fake.csv]
//   nullstat bench-clique --n-stats 8,16,32
//   nullstat split        --stats all.csv --out-calibration cal.csv --out-evaluation eval.csv
//
// Exit codes: 0 success, 1 runtime error (JSON record on stderr), 2 usage.

#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nullstat/nullstat.hpp"

namespace {

using nlohmann::json;
using namespace nullstat;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

void emit(std::ostream& os, const json& j) { os << j.dump() << "\n"; }

// Writes to `path`, or to stdout when the path is empty or "-".
void write_output(const std::string& path, const std::string& data) {
  if (path.empty() || path == "-") {
    std::cout << data;
    std::cout.flush();
  } else {
    detail::write_file(path, data);
  }
}

std::optional<MatrixFormat> parse_format(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return s == "binary" ? MatrixFormat::kBinary : MatrixFormat::kCsv;
}

void save(const StatisticsMatrix& m, const std::string& path, const std::optional<MatrixFormat>& fmt) {
  save_matrix(m, path, fmt.value_or(format_from_path(path)));
}

std::vector<std::string> split_commas(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    auto cell = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.remove_suffix(1);
    out.emplace_back(cell);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// Rows of a CSV file as header-keyed maps.
std::vector<std::map<std::string, std::string>> read_table(const std::string& path) {
  const std::string text = detail::read_file(path);
  std::vector<std::map<std::string, std::string>> rows;
  std::vector<std::string> header;
  std::size_t start = 0, line_no = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string::npos) nl = text.size();
    const std::string_view line(text.data() + start, nl - start);
    start = nl + 1;
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto cells = split_commas(line);
    if (header.empty()) {
      header = std::move(cells);
      continue;
    }
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::kParseError, path + ":" + std::to_string(line_no) + ": expected " +
                                              std::to_string(header.size()) + " cells");
    }
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < header.size(); ++i) row[header[i]] = cells[i];
    rows.push_back(std::move(row));
  }
  return rows;
}

const std::string& cell(const std::map<std::string, std::string>& row, const std::string& key,
                        const std::string& path) {
  const auto it = row.find(key);
  if (it == row.end()) throw Error(ErrorCode::kMissingColumn, path + ": no '" + key + "' column");
  return it->second;
}

double parse_number(const std::string& s, const std::string& what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::kParseError, "bad number '" + s + "' in " + what);
  }
  return v;
}

struct HyperFlags {
  Hyperparameters hp;
  std::string aggregator = "minp";

  void add(CLI::App* cmd) {
    cmd->add_option("--aggregator", aggregator, "stouffer or minp")
        ->check(CLI::IsMember({"stouffer", "minp", "min_p", "min-p"}))
        ->capture_default_str();
    cmd->add_option("--ecdf-bins", hp.ecdf_bins, "ECDF bins")->check(CLI::Range(2, 1 << 20))->capture_default_str();
    cmd->add_option("--chi2-bins", hp.chi2_bins, "contingency bins per axis")
        ->check(CLI::Range(2, 4096))
        ->capture_default_str();
    cmd->add_option("--cramer-v-max", hp.v_threshold, "edge threshold on Cramer's V")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    cmd->add_option("--ks-alpha", hp.alpha_ks, "clique KS significance level")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    cmd->add_option("--ks-subsample", hp.ks_subsample, "rows used by the KS filter (0 = all)")
        ->capture_default_str();
    cmd->add_option("--preferred", hp.preferred, "preferred statistics (key or extractor name)")
        ->delimiter(',');
    cmd->add_option("--seed", hp.seed, "random seed")->capture_default_str();
  }

  Hyperparameters resolve() const {
    Hyperparameters out = hp;
    out.aggregator = parse_aggregator(aggregator);
    return out;
  }
};

int run_calibrate(const std::string& stats, const std::string& out, const HyperFlags& flags,
                  std::size_t workers, std::string timestamp) {
  if (timestamp.empty()) {
    if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) timestamp = env;
  }
  const auto ref = load_matrix(stats);
  CalibrationConfig cfg;
  cfg.hyper = flags.resolve();
  cfg.workers = workers;
  cfg.timestamp = timestamp;
  const auto art = calibrate(ref, cfg);
  save_artifact(art, out);
  for (const auto& w : art.warnings) emit(std::cerr, {{"event", "warning"}, {"message", w}});

  json members = json::array();
  for (const auto& id : art.selected.member_ids) members.push_back(id.key());
  emit(std::cout, {{"event", "selection"},
                   {"members", members},
                   {"ks_pvalue", art.selected.ks_pvalue},
                   {"ks_statistic", art.selected.ks_statistic},
                   {"degraded", art.selected.degraded},
                   {"preferred_hits", art.selected.preferred_hits},
                   {"n_candidates", art.selected.n_candidates},
                   {"n_passing", art.selected.n_passing},
                   {"aggregator", std::string(to_string(art.aggregator.method))}});
  emit(std::cout, {{"event", "artifact"},
                   {"path", out},
                   {"digest", artifact_digest(art)},
                   {"n_statistics", art.ecdfs.size()},
                   {"reference_rows", ref.rows()}});
  return kExitOk;
}

int run_infer(const std::string& model, const std::string& stats, double alpha, const std::string& out,
              std::size_t workers) {
  const auto art = load_artifact(model);
  const auto test = load_matrix(stats);
  const auto results = infer(art, test, alpha, workers);

  std::string csv = "sample_id,label,unified_pvalue,decision";
  for (const auto& id : art.selected.member_ids) csv += ",p_" + id.key();
  csv += "\n";
  std::size_t n_fake = 0;
  for (const auto& r : results) {
    csv += r.sample_id;
    csv += ",";
    csv += to_string(r.label);
    csv += "," + detail::format_double(r.unified_pvalue);
    csv += ",";
    csv += to_string(r.decision);
    for (double p : r.per_statistic_pvalues) csv += "," + detail::format_double(p);
    csv += "\n";
    n_fake += r.decision == Decision::kFake;
  }
  write_output(out, csv);
  emit(std::cerr, {{"event", "summary"}, {"rows", results.size()}, {"fake", n_fake}, {"alpha", alpha}});
  return kExitOk;
}

int run_evaluate(const std::vector<std::string>& result_specs, const std::string& generators_path,
                 const std::vector<std::uint64_t>& seeds, const std::string& out) {
  std::map<std::string, std::string> generator_of;
  if (!generators_path.empty()) {
    for (const auto& row : read_table(generators_path)) {
      generator_of[cell(row, "sample_id", generators_path)] = cell(row, "generator", generators_path);
    }
  }

  std::vector<MethodScores> methods;
  std::vector<std::string> generators;
  for (std::size_t k = 0; k < result_specs.size(); ++k) {
    const auto& spec = result_specs[k];
    const auto eq = spec.find('=');
    MethodScores m;
    m.method = eq == std::string::npos ? "m" + std::to_string(k) : spec.substr(0, eq);
    const std::string path = eq == std::string::npos ? spec : spec.substr(eq + 1);
    if (eq == std::string::npos && result_specs.size() == 1) m.method = "nullstat";
    for (const auto& row : read_table(path)) {
      const auto& id = cell(row, "sample_id", path);
      const Label label = parse_label(cell(row, "label", path));
      const double p = parse_number(cell(row, "unified_pvalue", path), path);
      m.samples.push_back(score_from_pvalue(id, p, label));
      if (k == 0) {
        std::string gen = "all";
        if (const auto g = row.find("generator"); g != row.end()) gen = g->second;
        if (const auto g = generator_of.find(id); g != generator_of.end()) gen = g->second;
        generators.push_back(label == Label::kFake ? gen : "");
      }
    }
    methods.push_back(std::move(m));
  }
  const auto table = evaluate_generators(methods, generators, seeds);
  write_output(out, metric_table_csv(table));
  return kExitOk;
}

int run_simulate(const std::string& name, std::size_t n_samples, std::size_t n_fake, std::uint64_t seed,
                 const std::string& out, const std::string& out_fake, const std::optional<MatrixFormat>& fmt) {
  auto spec = preset(name, n_samples, seed);
  spec.n_fake_samples = n_fake;
  const auto data = generate(spec);
  save(data.real, out, fmt);
  if (!out_fake.empty()) save(data.fake, out_fake, fmt);
  emit(std::cerr, {{"event", "simulate"},
                   {"preset", name},
                   {"rows", data.real.rows()},
                   {"fake_rows", data.fake.rows()},
                   {"columns", data.real.cols()}});
  return kExitOk;
}

int run_bench(const std::vector<std::size_t>& n_stats, std::size_t n_samples, std::size_t reps,
              std::uint64_t seed, const std::string& out) {
  for (std::size_t t : n_stats) {
    if (t < 2) throw Error(ErrorCode::kInvalidArgument, "--n-stats entries must be >= 2");
  }
  write_output(out, scaling_csv(bench_clique_scaling(n_stats, n_samples, seed, reps)));
  return kExitOk;
}

int run_split(const std::string& stats, double fraction, std::uint64_t seed, const std::string& stratify,
              const std::string& out_cal, const std::string& out_eval, const std::optional<MatrixFormat>& fmt) {
  const auto m = load_matrix(stats);
  SplitSpec spec{fraction, seed, std::nullopt};
  if (!stratify.empty()) spec.stratify_by = stratify;
  const auto parts = split(m, spec);
  save(parts.calibration, out_cal, fmt);
  save(parts.evaluation, out_eval, fmt);
  emit(std::cerr, {{"event", "split"},
                   {"calibration_rows", parts.calibration.rows()},
                   {"evaluation_rows", parts.evaluation.rows()}});
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Training-free detection of generated images from per-image statistics"};
  app.set_version_flag("--version", std::string(kToolName) + " " + kVersion);
  app.require_subcommand(1);

  std::size_t workers = 1;
  std::string format;
  const auto add_workers = [&](CLI::App* cmd) {
    cmd->add_option("--workers", workers, "worker threads")->check(CLI::Range(1, 1024))->capture_default_str();
  };
  const auto add_format = [&](CLI::App* cmd) {
    cmd->add_option("--format", format, "output matrix format (default: from extension)")
        ->check(CLI::IsMember({"csv", "binary"}));
  };

  auto* cal = app.add_subcommand("calibrate", "fit ECDFs on real samples and select a clique");
  std::string cal_stats, cal_out, timestamp;
  HyperFlags hyper;
  cal->add_option("--stats", cal_stats, "reference statistics matrix (REAL rows only)")->required();
  cal->add_option("--out", cal_out, "artifact path")->required();
  cal->add_option("--timestamp", timestamp, "recorded in provenance (default: $SOURCE_DATE_EPOCH)");
  hyper.add(cal);
  add_workers(cal);

  auto* inf = app.add_subcommand("infer", "score test samples against a calibration artifact");
  std::string inf_model, inf_stats, inf_out;
  double alpha = 0.05;
  inf->add_option("--model", inf_model, "artifact path")->required();
  inf->add_option("--stats", inf_stats, "test statistics matrix")->required();
  inf->add_option("--alpha", alpha, "significance level")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  inf->add_option("--out", inf_out, "output CSV (default: stdout)");
  add_workers(inf);

  auto* ev = app.add_subcommand("evaluate", "per-generator AUC / AP table over balanced splits");
  std::vector<std::string> results;
  std::string gens_path, ev_out;
  std::vector<std::uint64_t> seeds = kDefaultSeeds;
  ev->add_option("--results", results, "[method=]infer output CSV; repeatable")->required();
  ev->add_option("--generators", gens_path, "CSV with sample_id,generator for FAKE rows");
  ev->add_option("--seeds", seeds, "split seeds")->delimiter(',');
  ev->add_option("--out", ev_out, "output CSV (default: stdout)");

  auto* sim = app.add_subcommand("simulate", "write synthetic statistic matrices");
  std::string preset_name, sim_out, sim_out_fake;
  std::size_t n_samples = 10000, n_fake = 0;
  std::uint64_t sim_seed = 0;
  sim->add_option("--preset", preset_name, "lemma-check, dependent-copy, single-shift, broad-shift")
      ->required()
      ->check(CLI::IsMember({"lemma-check", "dependent-copy", "single-shift", "broad-shift"}));
  sim->add_option("--n-samples", n_samples, "REAL rows")->check(CLI::PositiveNumber)->capture_default_str();
  sim->add_option("--n-fake", n_fake, "FAKE rows (default: --n-samples)");
  sim->add_option("--seed", sim_seed, "random seed")->capture_default_str();
  sim->add_option("--out", sim_out, "REAL matrix path")->required();
  sim->add_option("--out-fake", sim_out_fake, "FAKE matrix path");
  add_format(sim);

  auto* bench = app.add_subcommand("bench-clique", "time Cramer's V and clique enumeration");
  std::vector<std::size_t> n_stats = {8, 16, 32, 64, 128};
  std::size_t bench_samples = 200000, reps = 5;
  std::uint64_t bench_seed = 0;
  std::string bench_out;
  bench->add_option("--n-stats", n_stats, "statistic counts")->delimiter(',')->capture_default_str();
  bench->add_option("--n-samples", bench_samples, "rows per statistic")->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--reps", reps, "repetitions (median reported)")->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--seed", bench_seed, "random seed")->capture_default_str();
  bench->add_option("--out", bench_out, "output CSV (default: stdout)");

  auto* spl = app.add_subcommand("split", "partition REAL rows into calibration and evaluation sets");
  std::string spl_stats, spl_cal, spl_eval, stratify;
  double fraction = 0.3;
  std::uint64_t spl_seed = 0;
  spl->add_option("--stats", spl_stats, "input matrix")->required();
  spl->add_option("--fraction", fraction, "calibration fraction")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  spl->add_option("--seed", spl_seed, "random seed")->capture_default_str();
  spl->add_option("--stratify-by", stratify, "column whose quintiles are sampled separately");
  spl->add_option("--out-calibration", spl_cal, "calibration matrix path")->required();
  spl->add_option("--out-evaluation", spl_eval, "evaluation matrix path")->required();
  add_format(spl);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*cal) return run_calibrate(cal_stats, cal_out, hyper, workers, timestamp);
    if (*inf) return run_infer(inf_model, inf_stats, alpha, inf_out, workers);
    if (*ev) return run_evaluate(results, gens_path, seeds, ev_out);
    if (*sim) return run_simulate(preset_name, n_samples, n_fake, sim_seed, sim_out, sim_out_fake, parse_format(format));
    if (*bench) return run_bench(n_stats, bench_samples, reps, bench_seed, bench_out);
    if (*spl) return run_split(spl_stats, fraction, spl_seed, stratify, spl_cal, spl_eval, parse_format(format));
  } catch (const Error& e) {
    emit(std::cerr, {{"error", std::string(to_string(e.code()))}, {"message", e.what()}});
    return kExitRuntime;
  } catch (const std::exception& e) {
    emit(std::cerr, {{"error", "Internal"}, {"message", e.what()}});
    return kExitRuntime;
  }
  return kExitUsage;
}
