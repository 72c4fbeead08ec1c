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

#include "shamans/scenes.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <random>
#include <set>
#include <sstream>

#include "shamans/stable.hpp"

namespace shamans {
namespace {

int CircularCells(int a, int b, Index grid_size) {
  const int d = std::abs(a - b);
  return std::min(d, static_cast<int>(grid_size) - d);
}

// Source STFT rows [F x T] for each source, in SceneSpec order.
std::vector<Eigen::MatrixXcd> SourceSignals(const SceneSpec& spec,
                                            Index bins, Index frames,
                                            const StftParams& stft) {
  std::vector<Eigen::MatrixXcd> out;
  const auto n = spec.source_indices.size();
  if (const auto* sas = std::get_if<SasSource>(&spec.source_kind)) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto draws = SampleSas(
          AlphaParam(sas->alpha), sas->scale, bins * frames,
          SubstreamSeed(spec.seed, "source", spec.source_indices[i]));
      Eigen::MatrixXcd s(bins, frames);
      for (Index f = 0; f < bins; ++f)
        for (Index t = 0; t < frames; ++t) s(f, t) = draws[f * frames + t];
      // The DC bin carries no source energy.
      s.row(0).setZero();
      out.push_back(std::move(s));
    }
    return out;
  }

  const auto& wav = std::get<WavSources>(spec.source_kind);
  const auto needed =
      static_cast<Index>(std::llround(spec.duration_s * spec.sample_rate));
  std::vector<Eigen::VectorXd> signals;
  if (wav.paths.size() == 1 && n > 1) {
    const AudioBuffer audio = ReadWav(wav.paths[0]);
    Require(audio.channels() >= static_cast<Index>(n), ErrorKind::kScene,
            "WAV file has fewer channels than sources");
    for (std::size_t i = 0; i < n; ++i)
      signals.push_back(audio.samples.row(static_cast<Index>(i)).transpose());
    Require(audio.sample_rate == spec.sample_rate, ErrorKind::kScene,
            "WAV sample rate differs from the scene rate");
  } else {
    Require(wav.paths.size() >= n, ErrorKind::kScene,
            "fewer WAV files than sources");
    for (std::size_t i = 0; i < n; ++i) {
      const AudioBuffer audio = ReadWav(wav.paths[i]);
      Require(audio.sample_rate == spec.sample_rate, ErrorKind::kScene,
              "WAV sample rate differs from the scene rate");
      signals.push_back(audio.samples.row(0).transpose());
    }
  }
  for (auto& sig : signals) {
    Require(sig.size() >= needed, ErrorKind::kIo,
            "WAV source shorter than the scene duration");
    Eigen::VectorXd cut = sig.head(needed);
    const double rms = std::sqrt(cut.squaredNorm() / static_cast<double>(needed));
    if (rms > 0.0) cut /= rms;
    AudioBuffer mono;
    mono.samples = cut.transpose();
    mono.sample_rate = spec.sample_rate;
    const Spectrogram s = Stft(mono, stft);
    Require(s.num_freqs() == bins && s.num_frames() == frames,
            ErrorKind::kShape, "source STFT shape mismatch");
    Eigen::MatrixXcd rows(bins, frames);
    for (Index f = 0; f < bins; ++f) rows.row(f) = s.bin(f).row(0);
    rows.row(0).setZero();
    out.push_back(std::move(rows));
  }
  return out;
}

}  // namespace

void SceneSpec::Validate(Index grid_size) const {
  Require(!std::isnan(snr_db) && snr_db != -std::numeric_limits<double>::infinity(),
          ErrorKind::kScene, "SNR must be a number or +inf");
  Require(duration_s > 0.0 && sample_rate > 0, ErrorKind::kScene,
          "duration and sample rate must be positive");
  Require(min_separation_cells >= 1, ErrorKind::kScene,
          "minimum separation must be at least one cell");
  std::set<int> seen;
  for (std::size_t i = 0; i < source_indices.size(); ++i) {
    const int l = source_indices[i];
    Require(l >= 0 && l < grid_size, ErrorKind::kScene,
            "source index " + std::to_string(l) + " is off the grid");
    Require(seen.insert(l).second, ErrorKind::kScene,
            "duplicate source index");
    for (std::size_t j = 0; j < i; ++j)
      Require(CircularCells(l, source_indices[j], grid_size) >=
                  min_separation_cells,
              ErrorKind::kScene, "sources closer than the minimum separation");
  }
  if (const auto* sas = std::get_if<SasSource>(&source_kind)) {
    AlphaParam check(sas->alpha);
    (void)check;
    Require(sas->scale > 0.0, ErrorKind::kScene, "source scale must be > 0");
  }
  if (const auto* d = std::get_if<DiffuseReverb>(&reverb))
    Require(d->t60_s > 0.0, ErrorKind::kScene, "T60 must be positive");
}

Index SceneFrames(const SceneSpec& spec, const StftParams& stft) {
  const auto samples =
      static_cast<Index>(std::llround(spec.duration_s * spec.sample_rate));
  Require(samples >= stft.frame_size, ErrorKind::kScene,
          "scene shorter than one STFT frame");
  return (samples - stft.frame_size) / stft.hop + 1;
}

std::vector<Eigen::MatrixXcd> SceneNoise(std::uint64_t seed, Index channels,
                                         Index bins, Index frames) {
  std::mt19937_64 rng(SubstreamSeed(seed, "noise"));
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  std::vector<Eigen::MatrixXcd> out(bins, Eigen::MatrixXcd(channels, frames));
  for (auto& b : out)
    for (Index t = 0; t < frames; ++t)
      for (Index m = 0; m < channels; ++m) {
        const double re = normal(rng);
        const double im = normal(rng);
        b(m, t) = Complex(re, im);
      }
  return out;
}

Scene SynthScene(const SceneSpec& spec, const SteeringVectorSet& svs,
                 const StftParams& stft) {
  spec.Validate(svs.num_directions());
  const Index bins = RetainedBins(stft.frame_size, spec.sample_rate, stft.f_max);
  const Index frames = SceneFrames(spec, stft);
  const Index m = svs.num_mics();
  const double spacing = static_cast<double>(spec.sample_rate) / stft.frame_size;

  std::vector<Index> sv_freq(bins, -1);
  for (Index f = 1; f < bins; ++f) {
    sv_freq[f] = svs.FindFreq(f * spacing);
    Require(sv_freq[f] >= 0, ErrorKind::kShape,
            "steering vectors missing at " + std::to_string(f * spacing) +
                " Hz");
  }

  const auto sources = SourceSignals(spec, bins, frames, stft);
  std::vector<Eigen::MatrixXcd> mix(bins, Eigen::MatrixXcd::Zero(m, frames));
  for (std::size_t n = 0; n < sources.size(); ++n) {
    const int l = spec.source_indices[n];
    for (Index f = 1; f < bins; ++f)
      mix[f] += svs.at_freq(sv_freq[f]).row(l).transpose() *
                sources[n].row(f);
  }

  double source_power = 0.0;
  for (const auto& b : mix) source_power += b.squaredNorm();

  if (const auto* diffuse = std::get_if<DiffuseReverb>(&spec.reverb)) {
    if (source_power > 0.0) {
      // Direct energy per frame, then an exponentially decaying tail.
      Eigen::VectorXd direct = Eigen::VectorXd::Zero(frames);
      for (Index f = 1; f < bins; ++f)
        direct += mix[f].colwise().squaredNorm().transpose();
      const double frame_s = static_cast<double>(stft.hop) / spec.sample_rate;
      const double decay =
          std::exp(-6.0 * std::log(10.0) * frame_s / diffuse->t60_s);
      double sv_energy = 0.0;
      for (Index f = 1; f < bins; ++f)
        sv_energy += svs.at_freq(sv_freq[f]).squaredNorm();
      std::mt19937_64 rng(SubstreamSeed(spec.seed, "reverb"));
      std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
      double tail = 0.0;
      const Index l_count = svs.num_directions();
      for (Index t = 0; t < frames; ++t) {
        tail = decay * (tail + (t > 0 ? direct(t - 1) : 0.0));
        const double amp = std::sqrt(tail / sv_energy);
        for (Index f = 1; f < bins; ++f) {
          Eigen::VectorXcd r(l_count);
          for (Index l = 0; l < l_count; ++l) {
            const double re = normal(rng);
            const double im = normal(rng);
            r(l) = Complex(re, im) * amp;
          }
          mix[f].col(t) += svs.at_freq(sv_freq[f]).transpose() * r;
        }
      }
    }
  }

  SceneTruth truth;
  truth.indices = spec.source_indices;
  for (int l : spec.source_indices)
    truth.azimuths_deg.push_back(svs.grid().azimuths_deg[l]);

  if (std::isfinite(spec.snr_db)) {
    const auto noise = SceneNoise(spec.seed, m, bins, frames);
    double noise_power = 0.0;
    for (const auto& b : noise) noise_power += b.squaredNorm();
    const double scale =
        source_power > 0.0
            ? std::sqrt(source_power / std::pow(10.0, spec.snr_db / 10.0) /
                        noise_power)
            : 1.0;
    for (Index f = 0; f < bins; ++f) mix[f] += scale * noise[f];
    truth.noise_scale = scale;
    truth.realized_snr_db =
        source_power > 0.0
            ? 10.0 * std::log10(source_power / (scale * scale * noise_power))
            : -std::numeric_limits<double>::infinity();
  }

  return Scene{Spectrogram(std::move(mix), spec.sample_rate, stft.frame_size,
                           stft.hop),
               std::move(truth)};
}

std::vector<int> DrawSourceIndices(int count, Index grid_size,
                                   int min_separation_cells,
                                   std::uint64_t seed) {
  Require(count >= 0, ErrorKind::kScene, "source count must be >= 0");
  Require(static_cast<Index>(count) * min_separation_cells <= grid_size,
          ErrorKind::kScene, "too many sources for the separation constraint");
  std::mt19937_64 rng(SubstreamSeed(seed, "placement"));
  std::uniform_int_distribution<int> pick(0, static_cast<int>(grid_size) - 1);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    std::vector<int> out;
    for (int tries = 0; static_cast<int>(out.size()) < count && tries < 1000;
         ++tries) {
      const int l = pick(rng);
      bool ok = true;
      for (int o : out)
        if (CircularCells(l, o, grid_size) < min_separation_cells) ok = false;
      if (ok) out.push_back(l);
    }
    if (static_cast<int>(out.size()) == count) return out;
  }
  Fail(ErrorKind::kScene, "could not place sources with the requested spacing");
}

std::vector<SweepPoint> SweepGrid(
    const std::vector<std::pair<std::string, std::vector<double>>>& axes) {
  std::vector<SweepPoint> points(1);
  for (const auto& [name, values] : axes) {
    std::vector<SweepPoint> next;
    for (const auto& p : points)
      for (double v : values) {
        SweepPoint q = p;
        q.values.emplace_back(name, v);
        next.push_back(std::move(q));
      }
    points = std::move(next);
  }
  return points;
}

std::vector<BatchEntry> SceneBatch(const SceneSpec& base,
                                   const std::vector<SweepPoint>& sweep,
                                   int count, Index grid_size) {
  Require(count >= 1, ErrorKind::kParameter, "batch count must be >= 1");
  const std::vector<SweepPoint> points =
      sweep.empty() ? std::vector<SweepPoint>(1) : sweep;
  std::vector<BatchEntry> out;
  for (std::size_t p = 0; p < points.size(); ++p) {
    std::ostringstream key;
    key.precision(17);
    for (const auto& [name, value] : points[p].values)
      key << name << '=' << value << ';';
    const std::uint64_t point_hash = HashString(key.str());
    for (int i = 0; i < count; ++i) {
      BatchEntry e;
      e.point = p;
      e.seed = SubstreamSeed(MixSeed(base.seed) ^ point_hash, "scene", i);
      e.spec = base;
      e.spec.seed = e.seed;
      auto n = static_cast<int>(base.source_indices.size());
      for (const auto& [name, value] : points[p].values) {
        if (name == "snr_db") {
          e.spec.snr_db = value;
        } else if (name == "num_sources") {
          n = static_cast<int>(std::lround(value));
        } else if (name == "t60_s") {
          e.spec.reverb = value > 0.0 ? std::variant<NoReverb, DiffuseReverb>(
                                            DiffuseReverb{value})
                                      : NoReverb{};
        } else {
          Fail(ErrorKind::kParameter, "unknown sweep key '" + name + "'");
        }
      }
      e.spec.source_indices =
          DrawSourceIndices(n, grid_size, base.min_separation_cells, e.seed);
      out.push_back(std::move(e));
    }
  }
  return out;
}

nlohmann::json ToJson(const SceneSpec& spec) {
  nlohmann::json j;
  j["source_indices"] = spec.source_indices;
  if (const auto* sas = std::get_if<SasSource>(&spec.source_kind)) {
    j["source_kind"] = {{"type", "sas"}, {"alpha", sas->alpha},
                        {"scale", sas->scale}};
  } else {
    std::vector<std::string> paths;
    for (const auto& p : std::get<WavSources>(spec.source_kind).paths)
      paths.push_back(p.string());
    j["source_kind"] = {{"type", "wav"}, {"paths", paths}};
  }
  j["snr_db"] = std::isfinite(spec.snr_db) ? nlohmann::json(spec.snr_db)
                                           : nlohmann::json(nullptr);
  if (const auto* d = std::get_if<DiffuseReverb>(&spec.reverb)) {
    j["reverb"] = {{"type", "diffuse"}, {"t60_s", d->t60_s}};
  } else {
    j["reverb"] = {{"type", "none"}};
  }
  j["seed"] = spec.seed;
  j["duration_s"] = spec.duration_s;
  j["sample_rate"] = spec.sample_rate;
  j["min_separation_cells"] = spec.min_separation_cells;
  return j;
}

SceneSpec SceneSpecFromJson(const nlohmann::json& j) {
  try {
    SceneSpec s;
    s.source_indices = j.value("source_indices", std::vector<int>{});
    if (j.contains("source_kind")) {
      const auto& k = j.at("source_kind");
      const std::string type = k.value("type", "sas");
      if (type == "sas") {
        s.source_kind = SasSource{k.value("alpha", 1.5), k.value("scale", 1.0)};
      } else if (type == "wav") {
        WavSources w;
        for (const auto& p : k.at("paths")) w.paths.emplace_back(p.get<std::string>());
        s.source_kind = std::move(w);
      } else {
        Fail(ErrorKind::kScene, "unknown source kind '" + type + "'");
      }
    }
    if (j.contains("snr_db") && !j.at("snr_db").is_null())
      s.snr_db = j.at("snr_db").get<double>();
    if (j.contains("reverb")) {
      const auto& r = j.at("reverb");
      const std::string type = r.value("type", "none");
      if (type == "diffuse") {
        s.reverb = DiffuseReverb{r.at("t60_s").get<double>()};
      } else if (type != "none") {
        Fail(ErrorKind::kScene, "unknown reverb type '" + type + "'");
      }
    }
    s.seed = j.value("seed", std::uint64_t{0});
    s.duration_s = j.value("duration_s", 2.0);
    s.sample_rate = j.value("sample_rate", 48000);
    s.min_separation_cells = j.value("min_separation_cells", 2);
    return s;
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorKind::kFormat, std::string("bad scene JSON: ") + e.what());
  }
}

nlohmann::json ToJson(const SceneTruth& truth) {
  return {{"azimuths_deg", truth.azimuths_deg},
          {"indices", truth.indices},
          {"realized_snr_db", std::isfinite(truth.realized_snr_db)
                                  ? nlohmann::json(truth.realized_snr_db)
                                  : nlohmann::json(nullptr)},
          {"noise_scale", truth.noise_scale}};
}

void SaveSpectrogram(const Spectrogram& spec,
                     const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  Require(os.good(), ErrorKind::kIo, "cannot write " + path.string());
  auto u32 = [&](std::uint32_t v) { os.write(reinterpret_cast<char*>(&v), 4); };
  auto f64 = [&](double v) { os.write(reinterpret_cast<char*>(&v), 8); };
  os.write("SPGM", 4);
  u32(1);
  u32(static_cast<std::uint32_t>(spec.channels()));
  u32(static_cast<std::uint32_t>(spec.num_freqs()));
  u32(static_cast<std::uint32_t>(spec.num_frames()));
  u32(static_cast<std::uint32_t>(spec.sample_rate()));
  u32(static_cast<std::uint32_t>(spec.frame_size()));
  u32(static_cast<std::uint32_t>(spec.hop()));
  for (Index m = 0; m < spec.channels(); ++m)
    for (Index f = 0; f < spec.num_freqs(); ++f)
      for (Index t = 0; t < spec.num_frames(); ++t) {
        f64(spec.bin(f)(m, t).real());
        f64(spec.bin(f)(m, t).imag());
      }
  Require(os.good(), ErrorKind::kIo, "failed writing " + path.string());
}

Spectrogram LoadSpectrogram(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  Require(in.good(), ErrorKind::kIo, "cannot open " + path.string());
  const std::vector<char> data((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  auto take = [&](void* dst, std::size_t n) {
    Require(pos + n <= data.size(), ErrorKind::kFormat,
            "spectrogram file truncated");
    std::memcpy(dst, data.data() + pos, n);
    pos += n;
  };
  char magic[4];
  take(magic, 4);
  Require(std::memcmp(magic, "SPGM", 4) == 0, ErrorKind::kFormat,
          "bad spectrogram magic in " + path.string());
  std::uint32_t h[7];
  for (auto& v : h) take(&v, 4);
  Require(h[0] == 1, ErrorKind::kFormat, "unsupported spectrogram version");
  const std::uint64_t entries = std::uint64_t{h[1]} * h[2] * h[3];
  Require(entries <= (std::uint64_t{1} << 32) &&
              data.size() - pos >= entries * 16,
          ErrorKind::kFormat, "spectrogram payload truncated");
  std::vector<Eigen::MatrixXcd> bins(h[2], Eigen::MatrixXcd(h[1], h[3]));
  for (std::uint32_t m = 0; m < h[1]; ++m)
    for (std::uint32_t f = 0; f < h[2]; ++f)
      for (std::uint32_t t = 0; t < h[3]; ++t) {
        double re, im;
        take(&re, 8);
        take(&im, 8);
        bins[f](m, t) = Complex(re, im);
      }
  try {
    return Spectrogram(std::move(bins), static_cast<int>(h[4]),
                       static_cast<int>(h[5]), static_cast<int>(h[6]));
  } catch (const Error& e) {
    Fail(ErrorKind::kFormat, path.string() + ": " + e.what());
  }
}

}  // namespace shamans
