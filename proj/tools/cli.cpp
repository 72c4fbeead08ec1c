/*
Copyright 2026 The SHAMaNS Toolkit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "shamans/export.hpp"
#include "shamans/interp.hpp"
#include "shamans/scenes.hpp"
#include "shamans/signal.hpp"

namespace shamans::cli {
namespace fs = std::filesystem;
using nlohmann::json;

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kNumerical:
      return kExitNumerical;
    case ErrorKind::kShape:
      return kExitIncompatible;
    default:
      return kExitIo;
  }
}

namespace {

json ReadJsonFile(const fs::path& path) {
  std::ifstream in(path);
  Require(in.good(), ErrorKind::kIo, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    Fail(ErrorKind::kFormat, path.string() + ": " + e.what());
  }
}

fs::path PathOr(const json& doc, const char* key) {
  return doc.contains(key) && !doc.at(key).is_null()
             ? fs::path(doc.at(key).get<std::string>())
             : fs::path();
}

json Section(const json& doc, const char* key) {
  return doc.contains(key) ? doc.at(key) : json::object();
}

void RequireFile(const fs::path& path, const char* what) {
  if (path.empty()) return;
  Require(fs::exists(path), ErrorKind::kIo,
          std::string(what) + " not found: " + path.string());
}

bool HasMagic(const fs::path& path, const char* magic) {
  std::ifstream in(path, std::ios::binary);
  char buf[4] = {};
  in.read(buf, 4);
  return in.gcount() == 4 && std::equal(buf, buf + 4, magic);
}

// Rows `rows` of every frequency block.
SparseSvMeasurements SubsetMeasurements(const SparseSvMeasurements& pool,
                                        const std::vector<Index>& rows) {
  SparseSvMeasurements out;
  out.radius_m = pool.radius_m;
  out.freqs_hz = pool.freqs_hz;
  for (Index r : rows) out.directions.push_back(pool.directions[r]);
  for (const auto& block : pool.values) {
    Eigen::MatrixXcd sub(static_cast<Index>(rows.size()), block.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
      sub.row(static_cast<Index>(i)) = block.row(rows[i]);
    out.values.push_back(std::move(sub));
  }
  return out;
}

std::vector<Index> DrawRows(Index pool_size, int count, std::uint64_t seed) {
  Require(count >= 1 && count <= pool_size, ErrorKind::kParameter,
          "cannot draw " + std::to_string(count) + " of " +
              std::to_string(pool_size) + " measurements");
  std::vector<Index> idx(static_cast<std::size_t>(pool_size));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::mt19937_64 rng(seed);
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<Index> pick(i, pool_size - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::unique_ptr<SvInterpolator> FitInterpolator(
    const RunConfig& cfg, const std::string& kind,
    const SparseSvMeasurements& meas) {
  if (kind == "sh") {
    ShBasisConfig sh = cfg.max_degree < 0 ? ShBasisConfig::ForCount(meas.size())
                                          : ShBasisConfig{cfg.max_degree, 0.0};
    sh.ridge_lambda = cfg.interp_lambda;
    return std::make_unique<ShModel>(FitSh(meas, sh));
  }
  if (kind == "nslite") {
    CoordNetConfig cn{cfg.num_features, cfg.feature_scale, cfg.interp_lambda,
                      SubstreamSeed(cfg.seed, "nslite")};
    return std::make_unique<CoordNet>(FitCoordNet(meas, cn));
  }
  Fail(ErrorKind::kParameter, "unknown interpolator '" + kind + "'");
}

SparseSvMeasurements GreenPool(const RunConfig& cfg, int count) {
  return SampleGreenMeasurements(LoadGeometry(cfg.geometry), count,
                                 cfg.grid_radius_m,
                                 SceneFreqs(cfg.stft, cfg.sample_rate),
                                 SubstreamSeed(cfg.seed, "sampling"));
}

// SVs for one of the sv_model kinds on the given frequencies. Reference SVs
// are returned as stored; the consumer pairs frequencies.
SteeringVectorSet ResolveSvs(const RunConfig& cfg, const std::string& sv_model,
                             const std::vector<double>& freqs) {
  if (sv_model == "ref") {
    Require(!cfg.svs.empty(), ErrorKind::kIo,
            "sv_model 'ref' needs an SVSET path");
    return LoadSvset(cfg.svs);
  }
  if (sv_model == "alg")
    return AlgebraicSvs(LoadGeometry(cfg.geometry), cfg.Grid(), freqs);
  if (sv_model == "sh" || sv_model == "nslite") {
    Require(!cfg.model.empty(), ErrorKind::kIo,
            "sv_model '" + sv_model + "' needs a fitted model path");
    const auto model = LoadInterpolator(cfg.model);
    const bool is_sh = dynamic_cast<const ShModel*>(model.get()) != nullptr;
    Require(is_sh == (sv_model == "sh"), ErrorKind::kShape,
            cfg.model.string() + " is not a '" + sv_model + "' model");
    return InterpSvs(*model, cfg.Grid(), freqs);
  }
  Fail(ErrorKind::kParameter, "unknown sv_model '" + sv_model + "'");
}

Spectrogram LoadInput(const RunConfig& cfg) {
  Require(!cfg.input.empty(), ErrorKind::kIo, "no input given");
  if (HasMagic(cfg.input, "RIFF")) return Stft(ReadWav(cfg.input), cfg.stft);
  return LoadSpectrogram(cfg.input);
}

std::vector<double> PeakAzimuths(const LocalizeOutput& out) {
  std::vector<double> az;
  for (const auto& p : out.peaks)
    az.push_back(out.spectrum.grid.azimuths_deg[p.index]);
  return az;
}

std::string JoinDoubles(const std::vector<double>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) s += ';';
    s += FormatDouble(values[i]);
  }
  return s;
}

std::vector<double> SplitDoubles(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ';'))
    if (!item.empty()) out.push_back(std::stod(item));
  return out;
}

int ThreadCount(std::size_t jobs) {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SHAMANS_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = cap;
  }
  n = std::max(n, 1);
  return static_cast<int>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

// Axis names and per-point values, shared by sweep and report output.
struct PointTable {
  std::vector<std::string> axes;
  std::vector<std::vector<std::string>> values;  // [point][axis]
};

// Groups rows by (point, sv_model, method) in first-appearance order and
// writes mean/std of the per-source errors, accuracy at 15 degrees and the
// fraction of scenes whose peak count was right. With spectra present, adds
// the source-count AUC for each group's true count.
void WriteSummary(std::ostream& os, const PointTable& table,
                  const std::vector<SweepRow>& rows, bool with_auc,
                  int min_sep_cells) {
  std::vector<std::string> header = {"point"};
  header.insert(header.end(), table.axes.begin(), table.axes.end());
  for (const char* c : {"method", "sv_model", "scenes", "failed",
                        "mean_err_deg", "std_err_deg", "acc15", "count_acc"})
    header.push_back(c);
  if (with_auc) header.push_back("auc");
  WriteCsvRow(os, header);

  using Key = std::tuple<std::size_t, std::string, std::string>;
  std::vector<Key> order;
  std::map<Key, std::vector<const SweepRow*>> groups;
  for (const auto& r : rows) {
    Key k{r.point, r.sv_model, r.method};
    if (!groups.count(k)) order.push_back(k);
    groups[k].push_back(&r);
  }
  for (const auto& k : order) {
    const auto& members = groups[k];
    const auto& [point, sv_model, method] = k;
    std::vector<double> errors;
    int failed = 0, count_hits = 0, ok = 0;
    for (const SweepRow* r : members) {
      if (r->status != "ok") {
        ++failed;
        continue;
      }
      ++ok;
      errors.insert(errors.end(), r->errors_deg.begin(), r->errors_deg.end());
      count_hits += r->n_est == r->n_true;
    }
    std::vector<std::string> line = {std::to_string(point)};
    line.insert(line.end(), table.values[point].begin(),
                table.values[point].end());
    line.push_back(method);
    line.push_back(sv_model);
    line.push_back(std::to_string(members.size()));
    line.push_back(std::to_string(failed));
    if (errors.empty()) {
      line.insert(line.end(), {"", "", ""});
    } else {
      const double mean =
          std::accumulate(errors.begin(), errors.end(), 0.0) / errors.size();
      double var = 0.0;
      for (double e : errors) var += (e - mean) * (e - mean);
      line.push_back(FormatDouble(mean));
      line.push_back(FormatDouble(std::sqrt(var / errors.size())));
      line.push_back(FormatDouble(AccuracyAt(errors, 15.0)));
    }
    line.push_back(ok > 0 ? FormatDouble(static_cast<double>(count_hits) / ok)
                          : "");
    if (with_auc) {
      std::string auc;
      const int target = members.front()->n_true;
      std::vector<Eigen::VectorXd> spectra;
      std::vector<int> counts;
      for (const auto& r : rows)
        if (r.status == "ok" && r.method == method && r.sv_model == sv_model) {
          spectra.push_back(r.spectrum);
          counts.push_back(r.n_true);
        }
      const bool has_pos =
          std::count(counts.begin(), counts.end(), target) > 0;
      const bool has_neg = std::any_of(counts.begin(), counts.end(),
                                       [&](int c) { return c != target; });
      if (has_pos && has_neg)
        auc = FormatDouble(AucSourceCount(spectra, counts, target,
                                          ThresholdLadder(), min_sep_cells));
      line.push_back(auc);
    }
    WriteCsvRow(os, line);
  }
}

}  // namespace

RunConfig RunConfig::FromJson(const json& doc) {
  RunConfig c;
  try {
    Require(doc.is_object(), ErrorKind::kFormat,
            "config must be a JSON object");
    c.document = doc;
    c.method = doc.value("method", c.method);
    c.sv_model = doc.value("sv_model", c.sv_model);
    c.seed = doc.value("seed", c.seed);
    c.svs = PathOr(doc, "svs");
    c.model = PathOr(doc, "model");
    c.measurements = PathOr(doc, "measurements");
    c.input = PathOr(doc, "input");
    c.truth = PathOr(doc, "truth");
    c.output = PathOr(doc, "output");
    if (doc.contains("geometry")) c.geometry = doc.at("geometry");

    const json solver = Section(doc, "solver");
    c.solver.beta = solver.value("beta", c.solver.beta);
    c.solver.sparsity_lambda = solver.value("lambda", c.solver.sparsity_lambda);
    c.solver.iterations = solver.value("iterations", c.solver.iterations);
    c.solver.p_norm = solver.value("p", c.solver.p_norm);
    c.solver.alpha_override = solver.value("alpha", c.solver.alpha_override);
    c.solver.sv_reference_l1 =
        solver.value("sv_reference_l1", c.solver.sv_reference_l1);

    const json stft = Section(doc, "stft");
    c.stft.frame_size = stft.value("frame_size", c.stft.frame_size);
    c.stft.hop = stft.value("hop", c.stft.hop);
    c.stft.f_max = stft.value("f_max", c.stft.f_max);
    c.sample_rate = stft.value("sample_rate", c.sample_rate);

    const json grid = Section(doc, "grid");
    c.num_directions = grid.value("num_directions", c.num_directions);
    c.elevation_deg = grid.value("elevation_deg", c.elevation_deg);
    c.grid_radius_m = grid.value("radius_m", c.grid_radius_m);

    const json fit = Section(doc, "fit");
    c.interp = fit.value("interp", c.interp);
    c.n_sv = fit.value("n_sv", c.n_sv);
    c.max_degree = fit.value("max_degree", c.max_degree);
    c.interp_lambda = fit.value("lambda", c.interp_lambda);
    c.num_features = fit.value("num_features", c.num_features);
    c.feature_scale = fit.value("feature_scale", c.feature_scale);

    const json peaks = Section(doc, "peaks");
    c.num_sources = peaks.value("num_sources", c.num_sources);
    c.peak_threshold = peaks.value("threshold", c.peak_threshold);
    c.min_sep_cells = peaks.value("min_sep_cells", c.min_sep_cells);
  } catch (const json::exception& e) {
    Fail(ErrorKind::kFormat, std::string("bad config: ") + e.what());
  }
  return c;
}

void RunConfig::Validate() const {
  RequireFile(svs, "SVSET");
  RequireFile(model, "model");
  RequireFile(measurements, "measurement file");
  RequireFile(input, "input");
  RequireFile(truth, "truth file");
  if (geometry.is_string()) RequireFile(geometry.get<std::string>(), "geometry");
  ParseMethod(method);
  Require(sv_model == "ref" || sv_model == "alg" || sv_model == "sh" ||
              sv_model == "nslite",
          ErrorKind::kParameter, "unknown sv_model '" + sv_model + "'");
  solver.Validate();
  Require(n_sv >= 1, ErrorKind::kParameter, "n_sv must be >= 1");
  Require(num_sources >= 0, ErrorKind::kParameter,
          "num_sources must be >= 0");
  Require(min_sep_cells >= 1, ErrorKind::kParameter,
          "min_sep_cells must be >= 1");
  Require(interp_lambda >= 0.0, ErrorKind::kParameter,
          "interpolation lambda must be >= 0");
  Grid().Validate();
}

DoaGrid RunConfig::Grid() const {
  return DoaGrid::Uniform(num_directions, elevation_deg, grid_radius_m);
}

MethodSpec ParseMethod(const std::string& method) {
  MethodSpec m;
  m.tag = method;
  if (method == "shamans") return m;
  if (method == "srp-phat") {
    m.kind = MethodSpec::Kind::kSrpPhat;
    return m;
  }
  if (method.rfind("music-", 0) == 0) {
    const std::string rank = method.substr(6);
    Require(!rank.empty() && rank.size() < 4 &&
                std::all_of(rank.begin(), rank.end(), ::isdigit),
            ErrorKind::kParameter, "bad MUSIC rank in '" + method + "'");
    m.kind = MethodSpec::Kind::kMusic;
    m.music_rank = std::stoi(rank);
    Require(m.music_rank >= 1, ErrorKind::kParameter,
            "MUSIC rank must be >= 1");
    return m;
  }
  Fail(ErrorKind::kParameter, "unknown method '" + method + "'");
}

ArrayGeometry LoadGeometry(const json& geometry) {
  Require(!geometry.is_null(), ErrorKind::kIo, "no array geometry given");
  if (geometry.is_string()) return LoadGeometry(ReadJsonFile(geometry.get<std::string>()));
  ArrayGeometry g;
  try {
    if (geometry.contains("random")) {
      const json& r = geometry.at("random");
      g = ArrayGeometry::Random(r.at("count").get<int>(),
                                r.at("radius_m").get<double>(),
                                r.value("seed", std::uint64_t{0}),
                                r.value("min_spacing_m", 0.01));
    } else {
      for (const auto& p : geometry.at("mic_positions")) {
        Require(p.size() == 3, ErrorKind::kFormat,
                "microphone positions need three coordinates");
        g.mic_positions.emplace_back(p[0].get<double>(), p[1].get<double>(),
                                     p[2].get<double>());
      }
    }
  } catch (const json::exception& e) {
    Fail(ErrorKind::kFormat, std::string("bad geometry: ") + e.what());
  }
  g.Validate();
  return g;
}

std::vector<double> SceneFreqs(const StftParams& stft, int sample_rate) {
  const int bins = RetainedBins(stft.frame_size, sample_rate, stft.f_max);
  std::vector<double> freqs(bins);
  for (int f = 0; f < bins; ++f)
    freqs[f] = static_cast<double>(f) * sample_rate / stft.frame_size;
  return freqs;
}

LocalizeOutput LocalizeSpectrogram(const Spectrogram& spec,
                                   const SteeringVectorSet& svs,
                                   const MethodSpec& method,
                                   const SolverConfig& solver,
                                   int num_sources, double peak_threshold,
                                   int min_sep_cells) {
  LocalizeOutput out;
  out.meta = {{"method", method.tag}};
  switch (method.kind) {
    case MethodSpec::Kind::kShamans: {
      const ShamansResult r = ShamansLocalize(spec, svs, solver);
      out.raw = r.measure.upsilon;
      MeasureMetadata meta{r.alpha, solver.beta, solver.sparsity_lambda,
                           solver.iterations, solver.p_norm, r.freqs_used,
                           r.frames};
      out.meta["solver"] = ToJson(meta);
      out.meta["solver"]["sv_gain"] = r.sv_gain;
      break;
    }
    case MethodSpec::Kind::kMusic:
      out.raw = MusicSpectrum(spec, svs, method.music_rank).values;
      break;
    case MethodSpec::Kind::kSrpPhat:
      out.raw = SrpPhatSpectrum(spec, svs).values;
      break;
  }
  out.spectrum = {MinMaxNormalize(out.raw), svs.grid(), method.tag};
  out.peaks = num_sources > 0
                  ? PickPeaks(out.spectrum.values, 0.0, min_sep_cells,
                              num_sources)
                  : PickPeaks(out.spectrum.values, peak_threshold,
                              min_sep_cells,
                              static_cast<int>(svs.num_directions()));
  return out;
}

std::vector<std::vector<std::string>> ParseCsv(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  char c;
  auto end_row = [&] {
    row.push_back(std::move(field));
    field.clear();
    rows.push_back(std::move(row));
    row.clear();
    any = false;
  };
  while (in.get(c)) {
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field += '"';
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\r' && in.peek() == '\n') {
      in.get(c);
      end_row();
    } else if (c == '\n') {
      end_row();
    } else {
      field += c;
      any = true;
    }
  }
  Require(!quoted, ErrorKind::kFormat, "unterminated quoted CSV field");
  if (any || !field.empty() || !row.empty()) end_row();
  return rows;
}

void CmdFit(const RunConfig& cfg, std::ostream& log) {
  Require(!cfg.output.empty(), ErrorKind::kParameter, "fit needs an output path");
  SparseSvMeasurements pool;
  if (!cfg.measurements.empty()) {
    if (HasMagic(cfg.measurements, "SVMS")) {
      pool = LoadMeasurements(cfg.measurements);
    } else {
      const SteeringVectorSet svs = LoadSvset(cfg.measurements);
      std::vector<Index> all(static_cast<std::size_t>(svs.num_directions()));
      std::iota(all.begin(), all.end(), Index{0});
      pool = MeasurementsFromSvs(svs, all);
    }
  } else {
    pool = GreenPool(cfg, cfg.n_sv);
  }
  const SparseSvMeasurements meas = SubsetMeasurements(
      pool, DrawRows(pool.size(), cfg.n_sv,
                     SubstreamSeed(cfg.seed, "sampling", 1)));
  const auto model = FitInterpolator(cfg, cfg.interp, meas);
  if (cfg.output.has_parent_path())
    fs::create_directories(cfg.output.parent_path());
  model->Save(cfg.output);
  json sidecar = ReadJsonFile(SidecarPath(cfg.output));
  sidecar["fit"] = {{"n_sv", cfg.n_sv},
                    {"method", cfg.interp},
                    {"seed", cfg.seed}};
  WriteTextFile(SidecarPath(cfg.output), sidecar.dump(2) + "\n");
  log << "fit " << cfg.interp << " on " << cfg.n_sv << " measurements -> "
      << cfg.output.string() << "\n";
}

void CmdSimulate(const RunConfig& cfg, std::ostream& log) {
  Require(!cfg.output.empty(), ErrorKind::kParameter,
          "simulate needs an output directory");
  const std::vector<double> freqs = SceneFreqs(cfg.stft, cfg.sample_rate);
  const SteeringVectorSet svs = ResolveSvs(cfg, cfg.sv_model, freqs);
  const json scene_doc = Section(cfg.document, "scene");
  SceneSpec spec = SceneSpecFromJson(scene_doc);
  if (!scene_doc.contains("seed")) spec.seed = SubstreamSeed(cfg.seed, "scene");
  if (!scene_doc.contains("sample_rate")) spec.sample_rate = cfg.sample_rate;
  if (spec.source_indices.empty() && scene_doc.contains("num_sources"))
    spec.source_indices =
        DrawSourceIndices(scene_doc.at("num_sources").get<int>(),
                          svs.num_directions(), spec.min_separation_cells,
                          spec.seed);
  const Scene scene = SynthScene(spec, svs, cfg.stft);

  fs::create_directories(cfg.output);
  SaveSpectrogram(scene.spectrogram, cfg.output / "scene.spgm");
  WriteTextFile(cfg.output / "truth.json", ToJson(scene.truth).dump(2) + "\n");
  WriteTextFile(cfg.output / "scene.json", ToJson(spec).dump(2) + "\n");
  if (cfg.sv_model != "ref") SaveSvset(svs, cfg.output / "svs.svset");
  log << "simulated " << spec.source_indices.size() << " source(s), "
      << scene.spectrogram.num_frames() << " frames -> "
      << cfg.output.string() << "\n";
}

void CmdLocalize(const RunConfig& cfg, std::ostream& log) {
  Require(!cfg.output.empty(), ErrorKind::kParameter,
          "localize needs an output directory");
  const Spectrogram spec = LoadInput(cfg);
  const SteeringVectorSet svs =
      ResolveSvs(cfg, cfg.sv_model, LocalizationFreqs(spec));
  const MethodSpec method = ParseMethod(cfg.method);

  std::vector<double> truth;
  if (!cfg.truth.empty())
    truth = ReadJsonFile(cfg.truth).at("azimuths_deg").get<std::vector<double>>();
  int num_sources = cfg.num_sources;
  if (num_sources == 0) num_sources = static_cast<int>(truth.size());

  const LocalizeOutput out =
      LocalizeSpectrogram(spec, svs, method, cfg.solver, num_sources,
                          cfg.peak_threshold, cfg.min_sep_cells);
  const std::vector<double> estimates = PeakAzimuths(out);

  json result = out.meta;
  result["sv_model"] = cfg.sv_model;
  result["peaks"] = json::array();
  for (const auto& p : out.peaks)
    result["peaks"].push_back(
        {{"index", p.index},
         {"azimuth_deg", svs.grid().azimuths_deg[p.index]},
         {"value", p.value}});
  if (!truth.empty()) {
    const std::vector<double> errors = MatchedErrors(truth, estimates);
    result["metrics"] = {{"truth_deg", truth},
                         {"err_deg", errors},
                         {"acc15", AccuracyAt(errors, 15.0)}};
  }
  fs::create_directories(cfg.output);
  std::ostringstream csv;
  WriteSpectrumCsv(out.spectrum, csv);
  WriteTextFile(cfg.output / "spectrum.csv", csv.str());
  WriteTextFile(cfg.output / "result.json", result.dump(2) + "\n");
  log << method.tag << ":";
  for (double a : estimates) log << " " << FormatDouble(a);
  log << "\n";
}

void CmdSweep(const RunConfig& cfg, std::ostream& log) {
  Require(!cfg.output.empty(), ErrorKind::kParameter,
          "sweep needs an output directory");
  const json sweep = Section(cfg.document, "sweep");
  std::vector<std::pair<std::string, std::vector<double>>> axes;
  std::vector<std::string> methods, sv_models;
  int per_point = 30;
  double count_threshold = cfg.peak_threshold;
  try {
    const json axes_doc = Section(sweep, "axes");
    for (const auto& [name, values] : axes_doc.items())
      axes.emplace_back(name, values.get<std::vector<double>>());
    methods = sweep.value("methods", std::vector<std::string>{cfg.method});
    sv_models = sweep.value("sv_models", std::vector<std::string>{cfg.sv_model});
    per_point = sweep.value("scenes_per_point", per_point);
    count_threshold = sweep.value("count_threshold", count_threshold);
  } catch (const json::exception& e) {
    Fail(ErrorKind::kFormat, std::string("bad sweep section: ") + e.what());
  }
  std::vector<MethodSpec> parsed;
  for (const auto& m : methods) parsed.push_back(ParseMethod(m));

  const DoaGrid grid = cfg.Grid();
  const std::vector<double> freqs = SceneFreqs(cfg.stft, cfg.sample_rate);
  const SteeringVectorSet generator =
      cfg.svs.empty() ? AlgebraicSvs(LoadGeometry(cfg.geometry), grid, freqs)
                      : LoadSvset(cfg.svs);
  std::vector<SteeringVectorSet> models;
  for (const auto& kind : sv_models) {
    if (kind == "ref") {
      models.push_back(generator);
    } else if ((kind == "sh" || kind == "nslite") && cfg.model.empty()) {
      const auto fitted = FitInterpolator(cfg, kind, GreenPool(cfg, cfg.n_sv));
      models.push_back(InterpSvs(*fitted, generator.grid(), freqs));
    } else {
      models.push_back(ResolveSvs(cfg, kind, freqs));
    }
  }

  const json scene_doc = Section(cfg.document, "scene");
  SceneSpec base = SceneSpecFromJson(scene_doc);
  if (!scene_doc.contains("seed")) base.seed = SubstreamSeed(cfg.seed, "scene");
  if (!scene_doc.contains("sample_rate")) base.sample_rate = cfg.sample_rate;
  if (base.source_indices.empty() && scene_doc.contains("num_sources"))
    base.source_indices =
        DrawSourceIndices(scene_doc.at("num_sources").get<int>(),
                          generator.num_directions(),
                          base.min_separation_cells, base.seed);
  const std::vector<SweepPoint> points = SweepGrid(axes);
  const std::vector<BatchEntry> batch =
      SceneBatch(base, points, per_point, generator.num_directions());

  std::vector<std::vector<SweepRow>> results(batch.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < batch.size(); i = next++) {
      const BatchEntry& entry = batch[i];
      const int n_true = static_cast<int>(entry.spec.source_indices.size());
      std::vector<SweepRow> rows;
      auto make_row = [&](std::size_t s, std::size_t m) {
        SweepRow row;
        row.scene_id = i;
        row.point = entry.point;
        row.method = methods[m];
        row.sv_model = sv_models[s];
        row.n_true = n_true;
        return row;
      };
      std::optional<Scene> scene;
      std::string scene_error;
      try {
        scene = SynthScene(entry.spec, generator, cfg.stft);
      } catch (const std::exception& e) {
        scene_error = std::string("error: ") + e.what();
      }
      for (std::size_t s = 0; s < sv_models.size(); ++s)
        for (std::size_t m = 0; m < methods.size(); ++m) {
          SweepRow row = make_row(s, m);
          if (!scene) {
            row.status = scene_error;
            rows.push_back(std::move(row));
            continue;
          }
          try {
            const LocalizeOutput out = LocalizeSpectrogram(
                scene->spectrogram, models[s], parsed[m], cfg.solver, n_true,
                0.0, cfg.min_sep_cells);
            row.errors_deg =
                MatchedErrors(scene->truth.azimuths_deg, PeakAzimuths(out));
            row.n_est = static_cast<int>(
                PickPeaks(out.spectrum.values, count_threshold,
                          cfg.min_sep_cells,
                          static_cast<int>(models[s].num_directions()))
                    .size());
            row.spectrum = out.spectrum.values;
          } catch (const std::exception& e) {
            row.status = std::string("error: ") + e.what();
          }
          rows.push_back(std::move(row));
        }
      results[i] = std::move(rows);
    }
  };
  const int threads = ThreadCount(batch.size());
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  PointTable table;
  for (const auto& [name, values] : axes) table.axes.push_back(name);
  for (const auto& p : points) {
    std::vector<std::string> v;
    for (const auto& [name, value] : p.values) v.push_back(FormatDouble(value));
    table.values.push_back(std::move(v));
  }
  std::vector<SweepRow> flat;
  for (auto& rows : results)
    for (auto& r : rows) flat.push_back(std::move(r));

  std::ostringstream csv;
  std::vector<std::string> header = {"scene_id", "point"};
  header.insert(header.end(), table.axes.begin(), table.axes.end());
  for (const char* c : {"method", "sv_model", "n_true", "n_est",
                        "err_deg_per_source", "acc15", "status"})
    header.push_back(c);
  WriteCsvRow(csv, header);
  std::size_t failed = 0;
  for (const auto& r : flat) {
    std::vector<std::string> line = {std::to_string(r.scene_id),
                                     std::to_string(r.point)};
    line.insert(line.end(), table.values[r.point].begin(),
                table.values[r.point].end());
    line.push_back(r.method);
    line.push_back(r.sv_model);
    line.push_back(std::to_string(r.n_true));
    line.push_back(r.status == "ok" ? std::to_string(r.n_est) : "");
    line.push_back(JoinDoubles(r.errors_deg));
    line.push_back(r.status == "ok" && !r.errors_deg.empty()
                       ? FormatDouble(AccuracyAt(r.errors_deg, 15.0))
                       : "");
    line.push_back(r.status);
    failed += r.status != "ok";
    WriteCsvRow(csv, line);
  }
  std::ostringstream summary;
  WriteSummary(summary, table, flat, true, cfg.min_sep_cells);
  WriteTextFile(cfg.output / "rows.csv", csv.str());
  WriteTextFile(cfg.output / "summary.csv", summary.str());
  log << "sweep: " << flat.size() << " rows (" << failed << " failed) over "
      << batch.size() << " scenes -> " << cfg.output.string() << "\n";
}

void CmdReport(const RunConfig& cfg, std::ostream& out) {
  Require(!cfg.input.empty(), ErrorKind::kIo, "report needs a rows CSV");
  std::ifstream in(cfg.input, std::ios::binary);
  Require(in.good(), ErrorKind::kIo, "cannot open " + cfg.input.string());
  const auto csv = ParseCsv(in);
  Require(!csv.empty(), ErrorKind::kFormat, "empty rows CSV");
  const auto& header = csv[0];
  auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    Require(it != header.end(), ErrorKind::kFormat,
            "rows CSV lacks column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_point = column("point"), c_method = column("method"),
                    c_sv = column("sv_model"), c_true = column("n_true"),
                    c_est = column("n_est"),
                    c_err = column("err_deg_per_source"),
                    c_status = column("status");
  Require(c_point < c_method, ErrorKind::kFormat, "unexpected column order");

  PointTable table;
  table.axes.assign(header.begin() + c_point + 1, header.begin() + c_method);
  std::vector<SweepRow> rows;
  try {
    for (std::size_t i = 1; i < csv.size(); ++i) {
      const auto& line = csv[i];
      Require(line.size() == header.size(), ErrorKind::kFormat,
              "row " + std::to_string(i) + " has the wrong field count");
      SweepRow r;
      r.point = std::stoul(line[c_point]);
      if (table.values.size() <= r.point) table.values.resize(r.point + 1);
      if (table.values[r.point].empty())
        table.values[r.point].assign(line.begin() + c_point + 1,
                                     line.begin() + c_method);
      r.method = line[c_method];
      r.sv_model = line[c_sv];
      r.n_true = std::stoi(line[c_true]);
      r.n_est = line[c_est].empty() ? -1 : std::stoi(line[c_est]);
      r.errors_deg = SplitDoubles(line[c_err]);
      r.status = line[c_status];
      rows.push_back(std::move(r));
    }
  } catch (const std::logic_error& e) {
    Fail(ErrorKind::kFormat, std::string("bad rows CSV: ") + e.what());
  }
  std::ostringstream summary;
  WriteSummary(summary, table, rows, false, cfg.min_sep_cells);
  if (cfg.output.empty()) {
    out << summary.str();
  } else {
    WriteTextFile(cfg.output, summary.str());
  }
}

int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Sound source localization with alpha-stable spatial measures"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  app.add_option("--config", config_path, "JSON config document");
  // Flags override the config key at the given JSON pointer.
  struct Override {
    std::string flag;
    std::string pointer;
    bool numeric;
    std::string value;
  };
  std::vector<Override> overrides = {
      {"--seed", "/seed", true, {}},
      {"--method", "/method", false, {}},
      {"--sv-model", "/sv_model", false, {}},
      {"--svs", "/svs", false, {}},
      {"--model", "/model", false, {}},
      {"--measurements", "/measurements", false, {}},
      {"--geometry", "/geometry", false, {}},
      {"--input", "/input", false, {}},
      {"--truth", "/truth", false, {}},
      {"--output", "/output", false, {}},
      {"--interp", "/fit/interp", false, {}},
      {"--n-sv", "/fit/n_sv", true, {}},
      {"--max-degree", "/fit/max_degree", true, {}},
      {"--interp-lambda", "/fit/lambda", true, {}},
      {"--iterations", "/solver/iterations", true, {}},
      {"--sparsity-lambda", "/solver/lambda", true, {}},
      {"--num-sources", "/peaks/num_sources", true, {}},
      {"--scenes", "/sweep/scenes_per_point", true, {}},
  };
  for (auto& o : overrides)
    app.add_option(o.flag, o.value, "overrides " + o.pointer);

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"fit", "fit an SV interpolator to sparse measurements"},
      {"simulate", "synthesize a scene spectrogram"},
      {"localize", "localize sources in a spectrogram or WAV file"},
      {"sweep", "run a seeded parameter sweep"},
      {"report", "aggregate sweep rows"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitIo;
  }

  try {
    json doc = config_path.empty() ? json::object() : ReadJsonFile(config_path);
    for (const auto& o : overrides) {
      if (app.count(o.flag) == 0) continue;
      json value = o.value;
      if (o.numeric) {
        try {
          value = json::parse(o.value);
        } catch (const json::exception&) {
          Fail(ErrorKind::kParameter, o.flag + " expects a number");
        }
        Require(value.is_number(), ErrorKind::kParameter,
                o.flag + " expects a number");
      }
      doc[json::json_pointer(o.pointer)] = value;
    }
    const RunConfig cfg = RunConfig::FromJson(doc);
    cfg.Validate();
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "fit") CmdFit(cfg, out);
    else if (cmd == "simulate") CmdSimulate(cfg, out);
    else if (cmd == "localize") CmdLocalize(cfg, out);
    else if (cmd == "sweep") CmdSweep(cfg, out);
    else CmdReport(cfg, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return ExitCodeFor(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitOk;
}

}  // namespace shamans::cli
