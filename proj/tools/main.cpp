// Copyright 2026 The Rainfuse Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rainfuse/config.hpp"
#include "rainfuse/core.hpp"
#include "rainfuse/errors.hpp"
#include "rainfuse/evaluation.hpp"
#include "rainfuse/field_io.hpp"
#include "rainfuse/fusion.hpp"
#include "rainfuse/ingestion.hpp"
#include "rainfuse/synthetic.hpp"
#include "rainfuse/version.hpp"

namespace fs = std::filesystem;
using namespace rainfuse;

namespace {

struct CommonOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out_dir;
};

std::string bin_tag(std::int64_t bin_start) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%011lld", static_cast<long long>(bin_start));
  return buf;
}

void write_manifest(const fs::path& dir, const std::vector<std::string>& names,
                    const OutputStamp& stamp) {
  std::ofstream out(dir / "manifest.txt");
  if (!out) throw InputError("cannot write manifest in " + dir.string());
  out << stamp.comment_block();
  out << "# file, fnv1a64, bytes\n";
  for (const auto& name : names) {
    const fs::path p = dir / name;
    out << name << ", " << file_checksum(p.string()) << ", " << fs::file_size(p) << "\n";
  }
}

int cmd_simulate(const std::string& scenario_path, const CommonOverrides& overrides) {
  StormScenario scn = parse_scenario(scenario_path);
  if (overrides.seed) scn.seed = *overrides.seed;
  const fs::path out_dir = overrides.out_dir.value_or("out");
  fs::create_directories(out_dir);

  OutputStamp stamp{kVersion, fnv1a64_hex(canonical_scenario_text(scn)), scn.seed};
  const std::int64_t bin_width = 300;
  std::vector<std::string> names;

  for (std::int64_t t = 0; t <= scn.duration; t += bin_width) {
    const RainField truth = truth_field(scn, static_cast<double>(t));
    Rng radar_rng = Rng::stream(scn.seed, StreamPurpose::kRadarNoise,
                                static_cast<std::uint64_t>(t / bin_width));
    const RainField radar = degrade_to_radar(truth, scn, radar_rng);
    const std::string tag = bin_tag(truth.timestamp);
    write_field((out_dir / ("truth_" + tag + ".field")).string(), {truth, "truth_intensity", "mm_h"}, stamp);
    write_field((out_dir / ("radar_" + tag + ".field")).string(), {radar, "radar_intensity", "mm_h"}, stamp);
    names.push_back("truth_" + tag + ".field");
    names.push_back("radar_" + tag + ".field");
  }

  const FleetResult fleet = simulate_fleet(scn);
  write_vehicle_trace((out_dir / "trace.csv").string(), fleet.observations, scn.projection, stamp);
  write_label_file((out_dir / "labels.csv").string(), fleet.labels, stamp);
  names.push_back("trace.csv");
  names.push_back("labels.csv");

  write_manifest(out_dir, names, stamp);
  std::cout << "simulate: wrote " << names.size() << " files to " << out_dir.string()
            << " (seed " << scn.seed << ", hash " << stamp.config_hash << ")\n";
  return kExitOk;
}

std::vector<RainField> load_radar_sequence(const RunConfig& cfg) {
  std::vector<std::string> files = cfg.radar_files;
  if (!cfg.radar_dir.empty()) {
    for (const auto& entry : fs::directory_iterator(cfg.radar_dir)) {
      const std::string name = entry.path().filename().string();
      if (name.rfind("radar_", 0) == 0 && entry.path().extension() == ".field")
        files.push_back(entry.path().string());
      else if (entry.path().extension() == ".scan")
        files.push_back(entry.path().string());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw InputError("no radar inputs configured");

  std::vector<RainField> sequence;
  for (const auto& f : files) {
    if (fs::path(f).extension() == ".scan") {
      if (!cfg.grid_set) throw InputError("radial scans need a [grid] section to resample onto");
      const RadialScan scan = read_radial_scan(f);
      sequence.push_back(resample_radial(scan, cfg.grid).field);
    } else {
      FieldFile file = read_field(f);
      sequence.push_back(std::move(file.field));
    }
  }
  std::sort(sequence.begin(), sequence.end(),
            [](const RainField& a, const RainField& b) { return a.timestamp < b.timestamp; });
  for (std::size_t i = 1; i < sequence.size(); ++i)
    if (!(sequence[i].grid == sequence[0].grid)) {
      std::ostringstream msg;
      msg << "radar grids differ between inputs: grid "
          << sequence[0].grid.nx << "x" << sequence[0].grid.ny << " cell "
          << sequence[0].grid.cell_size << " vs grid " << sequence[i].grid.nx << "x"
          << sequence[i].grid.ny << " cell " << sequence[i].grid.cell_size;
      throw InputError(msg.str());
    }
  return sequence;
}

struct TrackLoadSummary {
  std::size_t malformed_rows = 0;
  std::vector<TraceQualityReport> quality;
  std::vector<std::string> dropped_vehicles;
};

/// Parse + screen + aggregate the trace into per-vehicle tracks. Vehicles
/// whose sensors never report despite labeled rain are dropped, matching the
/// manual-removal workflow; flutter intervals are excised from evidence.
std::vector<VehicleTrack> load_tracks(const RunConfig& cfg,
                                      const std::vector<LabelInterval>* labels = nullptr,
                                      TrackLoadSummary* summary = nullptr) {
  if (cfg.trace_file.empty()) throw InputError("no trace file configured");
  ParsedTrace parsed = parse_vehicle_trace(cfg.trace_file, cfg.projection);
  const auto quality = assess_trace_quality(parsed.observations, labels);

  std::map<std::string, const TraceQualityReport*> quality_by_vehicle;
  for (const auto& report : quality) quality_by_vehicle[report.vehicle_id] = &report;

  std::map<std::string, std::vector<VehicleObservation>> by_vehicle;
  for (auto& o : parsed.observations) by_vehicle[o.vehicle_id].push_back(std::move(o));

  std::vector<VehicleTrack> tracks;
  std::vector<std::string> dropped;
  for (auto& [id, trace] : by_vehicle) {
    std::stable_sort(trace.begin(), trace.end(),
                     [](const VehicleObservation& a, const VehicleObservation& b) {
                       return a.timestamp < b.timestamp;
                     });
    const auto it = quality_by_vehicle.find(id);
    if (it != quality_by_vehicle.end()) {
      if (it->second->flags.count(TraceFlag::kNonReporting)) {
        dropped.push_back(id);
        continue;
      }
      if (it->second->flags.count(TraceFlag::kFlutterMalfunction))
        trace = remove_intervals(trace, detect_flutter(trace));
    }
    VehicleTrack track;
    track.vehicle_id = id;
    track.bins = aggregate_wiper(trace, cfg.wiper_aggregation_width);
    if (!track.bins.empty()) tracks.push_back(std::move(track));
  }
  if (summary) {
    summary->malformed_rows = parsed.malformed_rows;
    summary->quality = quality;
    summary->dropped_vehicles = dropped;
  }
  return tracks;
}

const char* trace_flag_name(TraceFlag flag) {
  switch (flag) {
    case TraceFlag::kNonReporting: return "non_reporting";
    case TraceFlag::kFlutterMalfunction: return "flutter_malfunction";
    case TraceFlag::kUnobservableModes: return "unobservable_modes";
  }
  return "unknown";
}

RunConfig resolve_config(const std::string& config_path, const CommonOverrides& overrides) {
  RunConfig cfg = parse_run_config(config_path);
  if (overrides.seed) cfg.fusion.global_seed = *overrides.seed;
  if (overrides.workers) cfg.fusion.workers = *overrides.workers;
  if (overrides.out_dir) cfg.out_dir = *overrides.out_dir;
  if (!cfg.injection_file.empty())
    cfg.fusion.injection = read_injection_file(cfg.injection_file);
  else
    cfg.fusion.injection = default_injection_distribution();
  return cfg;
}

void write_case_grid(const std::string& path, const std::vector<CaseLabel>& labels,
                     const GridSpec& grid, std::int64_t timestamp, const OutputStamp& stamp) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write file: " + path);
  out << stamp.comment_block();
  out << "# cases: 0=both-dry 1=both-rain 2=hole 3=addition\n";
  out << "timestamp " << timestamp << "\n";
  out << "grid " << format_double(grid.origin_x) << " " << format_double(grid.origin_y) << " "
      << format_double(grid.cell_size) << " " << grid.nx << " " << grid.ny << "\n";
  for (int iy = 0; iy < grid.ny; ++iy) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      if (ix) out << " ";
      out << static_cast<int>(labels[static_cast<std::size_t>(grid.linear(ix, iy))]);
    }
    out << "\n";
  }
}

int cmd_fuse(const std::string& config_path, const CommonOverrides& overrides) {
  RunConfig cfg = resolve_config(config_path, overrides);
  const fs::path out_dir = cfg.out_dir;
  fs::create_directories(out_dir);
  const OutputStamp stamp = cfg.stamp();

  const std::vector<RainField> radar = load_radar_sequence(cfg);
  std::vector<LabelInterval> labels;
  if (!cfg.label_file.empty()) labels = read_label_file(cfg.label_file);
  TrackLoadSummary trace_summary;
  std::vector<VehicleTrack> tracks;
  if (!cfg.trace_file.empty())
    tracks = load_tracks(cfg, cfg.label_file.empty() ? nullptr : &labels, &trace_summary);

  // evidence per fusion bin
  std::map<std::int64_t, std::vector<VehicleObservation>> evidence;
  for (const auto& track : tracks)
    for (const auto& agg : track.bins)
      evidence[bin_of(static_cast<double>(agg.bin.start), cfg.fusion.time_bin_width).index()]
          .push_back(agg.as_observation());

  std::ofstream log(out_dir / "run.log");
  log << stamp.comment_block();
  log << "particles " << cfg.fusion.n_particles << "\n";
  log << "vehicles " << tracks.size() << "\n";
  log << "malformed_rows " << trace_summary.malformed_rows << "\n";
  for (const auto& report : trace_summary.quality) {
    log << "quality " << report.vehicle_id;
    for (const auto flag : report.flags) log << " " << trace_flag_name(flag);
    log << " intervals " << report.intervals.size() << "\n";
  }
  for (const auto& id : trace_summary.dropped_vehicles) log << "dropped_vehicle " << id << "\n";

  std::vector<std::string> names;
  PosteriorField posterior = build_prior(radar.front(), cfg.fusion);
  std::map<std::int64_t, const RainField*> radar_by_bin;
  for (const auto& field : radar)
    if (!radar_by_bin.emplace(bin_of(field.timestamp, cfg.fusion.time_bin_width).index(), &field).second)
      throw InputError("two radar fields fall into the same time bin");

  const RainField* current = &radar.front();
  for (;;) {
    const std::int64_t bin_index = posterior.time_bin.index();
    AssimilationStats stats;
    auto ev = evidence.find(bin_index);
    posterior = assimilate_bin(posterior, ev != evidence.end() ? ev->second : std::vector<VehicleObservation>{},
                               cfg.fusion, &stats);

    const std::string tag = bin_tag(posterior.time_bin.start);
    write_field((out_dir / ("mean_" + tag + ".field")).string(),
                {posterior.summary_mean, "posterior_mean_intensity", "mm_h"}, stamp);
    RainField prob{posterior.grid, posterior.time_bin.start, posterior.summary_prob_rain};
    write_field((out_dir / ("prob_" + tag + ".field")).string(), {prob, "posterior_prob_rain", "probability"},
                stamp);
    const auto cases = four_case_report(*current, posterior, cfg.fusion.sensor.rain_threshold_tau);
    write_case_grid((out_dir / ("cases_" + tag + ".txt")).string(), cases, posterior.grid,
                    posterior.time_bin.start, stamp);
    names.push_back("mean_" + tag + ".field");
    names.push_back("prob_" + tag + ".field");
    names.push_back("cases_" + tag + ".txt");

    log << "bin " << posterior.time_bin.start << " observations " << stats.observations_in
        << " aggregates " << stats.aggregates << " dropped_mister " << stats.dropped_mister
        << " dropped_out_of_domain " << stats.dropped_out_of_domain << " cells_updated "
        << stats.cells_updated << " resampled " << stats.cells_resampled << "\n";

    auto next = radar_by_bin.find(bin_index + 1);
    if (next == radar_by_bin.end()) break;
    current = next->second;
    posterior = advance_bin(posterior, *next->second, cfg.fusion);
  }
  log << "done\n";
  log.close();
  names.push_back("run.log");
  write_manifest(out_dir, names, stamp);
  std::cout << "fuse: wrote " << names.size() << " files to " << out_dir.string() << " (hash "
            << stamp.config_hash << ", seed " << cfg.fusion.global_seed << ")\n";
  return kExitOk;
}

void write_roc(const std::string& path, const RocCurve& curve, const OutputStamp& stamp) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write file: " + path);
  out << stamp.comment_block();
  out << "# threshold, fpr, tpr\n";
  for (const auto& p : curve.points)
    out << format_double(p.threshold) << ", " << format_double(p.fpr) << ", " << format_double(p.tpr)
        << "\n";
  out << "# auc, " << format_double(curve.auc) << "\n";
}

int cmd_evaluate(const std::string& config_path, const CommonOverrides& overrides) {
  RunConfig cfg = resolve_config(config_path, overrides);
  const fs::path out_dir = cfg.out_dir;
  fs::create_directories(out_dir);
  const OutputStamp stamp = cfg.stamp();

  const std::vector<RainField> radar = load_radar_sequence(cfg);
  std::vector<LabelInterval> labels;
  const bool have_labels = !cfg.label_file.empty();
  if (have_labels) labels = read_label_file(cfg.label_file);
  std::vector<VehicleTrack> tracks = load_tracks(cfg, have_labels ? &labels : nullptr);

  const LooResult loo = leave_one_out(tracks, radar, cfg.fusion, have_labels ? &labels : nullptr);

  write_roc((out_dir / "roc_radar.csv").string(), loo.radar_only, stamp);
  write_roc((out_dir / "roc_fused.csv").string(), loo.fused, stamp);

  std::ofstream summary(out_dir / "summary.txt");
  summary << stamp.comment_block();
  summary << "samples " << loo.samples.size() << "\n";
  summary << "auc_radar_only " << format_double(loo.radar_only.auc) << "\n";
  summary << "auc_fused " << format_double(loo.fused.auc) << "\n";
  summary << "auc_margin " << format_double(loo.fused.auc - loo.radar_only.auc) << "\n";
  if (loo.fused_vs_truth) {
    summary << "auc_radar_only_vs_truth " << format_double(loo.radar_only_vs_truth->auc) << "\n";
    summary << "auc_fused_vs_truth " << format_double(loo.fused_vs_truth->auc) << "\n";
  }

  // Table-shaped per-source rates against ground-truth labels, when present.
  std::ofstream metrics(out_dir / "metrics.csv");
  metrics << stamp.comment_block();
  if (!have_labels) {
    metrics << "# no label file configured: leave-one-out mode only, no per-source table\n";
    metrics << "# source, tpr, tnr, tp, fp, tn, fn\n";
  } else {
    metrics << "# source, tpr, tnr, tp, fp, tn, fn\n";
    std::vector<GageReading> gages;
    if (!cfg.gage_file.empty()) gages = read_gage_file(cfg.gage_file, cfg.projection);

    std::map<std::int64_t, const RainField*> radar_by_bin;
    for (const auto& field : radar)
      radar_by_bin[bin_of(field.timestamp, cfg.fusion.time_bin_width).index()] = &field;

    ConfusionCounts wiper_counts, radar_counts, gage_counts;
    for (const auto& track : tracks) {
      for (const auto& agg : track.bins) {
        const double mid = static_cast<double>(agg.bin.start) + static_cast<double>(agg.bin.width) / 2.0;
        const auto truth = label_state_at(labels, track.vehicle_id, mid);
        if (!truth) continue;
        auto tally = [&](ConfusionCounts& c, bool predicted) {
          if (predicted && *truth) ++c.tp;
          else if (predicted && !*truth) ++c.fp;
          else if (!predicted && *truth) ++c.fn;
          else ++c.tn;
        };
        tally(wiper_counts, agg.on);
        const auto rb = radar_by_bin.find(bin_of(mid, cfg.fusion.time_bin_width).index());
        if (rb != radar_by_bin.end())
          tally(radar_counts, radar_state(*rb->second, {agg.x, agg.y}, cfg.fusion.sensor.rain_threshold_tau));
        if (!gages.empty()) {
          const auto gs = gage_state(gages, {agg.x, agg.y}, mid, cfg.fusion.sensor.rain_threshold_tau);
          if (gs) tally(gage_counts, *gs);
        }
      }
    }
    auto emit = [&](const char* name, const ConfusionCounts& c) {
      if (c.total() == 0) return;
      try {
        const Rates r = rates(c);
        metrics << name << ", " << format_double(r.tpr) << ", " << format_double(r.tnr) << ", "
                << c.tp << ", " << c.fp << ", " << c.tn << ", " << c.fn << "\n";
      } catch (const InsufficientDataError&) {
        metrics << name << ", nan, nan, " << c.tp << ", " << c.fp << ", " << c.tn << ", " << c.fn << "\n";
      }
    };
    emit("wiper", wiper_counts);
    emit("radar", radar_counts);
    emit("gage", gage_counts);
  }

  write_manifest(out_dir, {"roc_radar.csv", "roc_fused.csv", "summary.txt", "metrics.csv"}, stamp);
  std::cout << "evaluate: auc_fused " << format_double(loo.fused.auc) << " auc_radar "
            << format_double(loo.radar_only.auc) << " margin "
            << format_double(loo.fused.auc - loo.radar_only.auc) << "\n";
  return kExitOk;
}

char intensity_glyph(double v) {
  static const char* glyphs = " .:-=+*#%@";
  if (v <= 0.05) return glyphs[0];
  int idx = 1 + static_cast<int>(std::log2(1.0 + v));
  if (idx > 9) idx = 9;
  return glyphs[idx];
}

int cmd_report(const std::string& in_dir) {
  std::vector<fs::path> fields;
  fs::path dir(in_dir);
  if (!fs::is_directory(dir)) throw InputError("not a directory: " + in_dir);
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".field") fields.push_back(entry.path());
  std::sort(fields.begin(), fields.end());

  for (const auto& path : fields) {
    const FieldFile file = read_field(path.string());
    std::cout << path.filename().string() << "  (" << file.quantity << ", " << file.units
              << ", t=" << file.field.timestamp << ")\n";
    for (int iy = file.field.grid.ny - 1; iy >= 0; --iy) {
      for (int ix = 0; ix < file.field.grid.nx; ++ix)
        std::cout << intensity_glyph(file.field.at(ix, iy));
      std::cout << "\n";
    }
    std::cout << "\n";
  }

  const fs::path summary = dir / "summary.txt";
  if (fs::exists(summary)) {
    std::ifstream in(summary);
    std::cout << in.rdbuf();
  }
  for (const char* roc_name : {"roc_radar.csv", "roc_fused.csv"}) {
    const fs::path roc = dir / roc_name;
    if (!fs::exists(roc)) continue;
    std::cout << "\n" << roc_name << "\n";
    std::ifstream in(roc);
    std::string line;
    while (std::getline(in, line))
      if (!line.empty() && line[0] != '#') std::cout << "  " << line << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rainfuse: corrects radar rainfall fields with vehicle wiper evidence"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  CommonOverrides overrides;
  std::string scenario_path, config_path, in_dir;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option_function<std::uint64_t>("--seed", [&](std::uint64_t s) { overrides.seed = s; },
                                            "override the configured seed");
    cmd->add_option_function<int>("--workers", [&](int w) { overrides.workers = w; },
                                  "worker threads (must not change outputs)");
    cmd->add_option_function<std::string>("--out", [&](std::string o) { overrides.out_dir = o; },
                                          "output directory");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "generate a synthetic storm dataset");
  simulate->add_option("--scenario", scenario_path, "scenario file")->required();
  add_common(simulate);

  CLI::App* fuse = app.add_subcommand("fuse", "assimilate wiper evidence into radar fields");
  fuse->add_option("--config", config_path, "run config file")->required();
  add_common(fuse);

  CLI::App* evaluate = app.add_subcommand("evaluate", "leave-one-out validation and metrics");
  evaluate->add_option("--config", config_path, "run config file")->required();
  add_common(evaluate);

  CLI::App* report = app.add_subcommand("report", "render fields and ROC tables as text");
  report->add_option("--in", in_dir, "directory with fuse/evaluate outputs")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return cmd_simulate(scenario_path, overrides);
    if (fuse->parsed()) return cmd_fuse(config_path, overrides);
    if (evaluate->parsed()) return cmd_evaluate(config_path, overrides);
    if (report->parsed()) return cmd_report(in_dir);
  } catch (const InsufficientDataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInsufficientData;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumericalError;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitOk;
}
