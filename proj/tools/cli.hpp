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

#ifndef SHAMANS_TOOLS_CLI_HPP_
#define SHAMANS_TOOLS_CLI_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "shamans/baselines.hpp"
#include "shamans/common.hpp"
#include "shamans/eval.hpp"
#include "shamans/stable.hpp"
#include "shamans/steering.hpp"

namespace shamans::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitIncompatible = 4;

int ExitCodeFor(ErrorKind kind);

// Everything a command needs, resolved from one JSON document. Sections that
// only one command reads (scene, sweep) stay in `document`.
struct RunConfig {
  std::string method = "shamans";  // shamans | music-<k> | srp-phat
  std::string sv_model = "ref";    // ref | alg | sh | nslite
  std::uint64_t seed = 0;

  SolverConfig solver;
  StftParams stft;
  int sample_rate = 48000;
  int num_directions = 60;
  double elevation_deg = 0.0;
  double grid_radius_m = 1.7;

  std::filesystem::path svs;           // SVSET of reference SVs
  std::filesystem::path model;         // fitted interpolator
  std::filesystem::path measurements;  // SVMS or SVSET measurement pool
  std::filesystem::path input;         // SPGM / WAV / sweep rows CSV
  std::filesystem::path truth;         // truth JSON written by simulate
  std::filesystem::path output;
  nlohmann::json geometry;  // path string or inline object

  // fit
  std::string interp = "sh";  // sh | nslite
  int n_sv = 32;
  int max_degree = -1;  // -1: derived from n_sv
  double interp_lambda = 1e-6;
  int num_features = 256;
  double feature_scale = 3.0;

  // peak picking
  int num_sources = 0;  // 0: count peaks above peak_threshold
  double peak_threshold = 0.5;
  int min_sep_cells = 2;

  nlohmann::json document;

  static RunConfig FromJson(const nlohmann::json& document);
  // Throws kIo for referenced files that do not exist and kParameter for
  // out-of-range values.
  void Validate() const;
  DoaGrid Grid() const;
};

// Parses and range-checks "shamans", "music-<k>" or "srp-phat".
struct MethodSpec {
  enum class Kind { kShamans, kMusic, kSrpPhat } kind = Kind::kShamans;
  int music_rank = 0;
  std::string tag;
};
MethodSpec ParseMethod(const std::string& method);

// Geometry from {"mic_positions": [[x, y, z], ...]} or
// {"random": {"count", "radius_m", "seed"}}, or a path to such a file.
ArrayGeometry LoadGeometry(const nlohmann::json& geometry);

// The bin frequencies a scene with these STFT settings carries, DC included.
std::vector<double> SceneFreqs(const StftParams& stft, int sample_rate);

struct LocalizeOutput {
  AngularSpectrum spectrum;  // min-max normalized
  Eigen::VectorXd raw;       // before normalization
  std::vector<Peak> peaks;
  nlohmann::json meta;
};

LocalizeOutput LocalizeSpectrogram(const Spectrogram& spec,
                                   const SteeringVectorSet& svs,
                                   const MethodSpec& method,
                                   const SolverConfig& solver,
                                   int num_sources, double peak_threshold,
                                   int min_sep_cells);

// One sweep row before formatting.
struct SweepRow {
  std::size_t scene_id = 0;
  std::size_t point = 0;
  std::string method;
  std::string sv_model;
  int n_true = 0;
  int n_est = 0;
  std::vector<double> errors_deg;
  std::string status = "ok";
  Eigen::VectorXd spectrum;  // normalized, for AUC
};

// RFC 4180 reader (quoted fields, doubled quotes, CRLF or LF rows).
std::vector<std::vector<std::string>> ParseCsv(std::istream& in);

void CmdFit(const RunConfig& config, std::ostream& log);
void CmdSimulate(const RunConfig& config, std::ostream& log);
void CmdLocalize(const RunConfig& config, std::ostream& log);
void CmdSweep(const RunConfig& config, std::ostream& log);
void CmdReport(const RunConfig& config, std::ostream& out);

// Full command line, argv[0] excluded. Returns the process exit code.
int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace shamans::cli

#endif  // SHAMANS_TOOLS_CLI_HPP_
