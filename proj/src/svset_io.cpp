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

#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "shamans/interp.hpp"
#include "shamans/steering.hpp"
#include "shamans/svset_io.hpp"

namespace shamans {
namespace {

// Rejects headers whose payload could not be addressed.
constexpr std::uint64_t kMaxEntries = std::uint64_t{1} << 34;

class Writer {
 public:
  explicit Writer(std::ostream& os) : os_(os) {}
  void U32(std::uint32_t v) { Raw(&v, 4); }
  void F64(double v) { Raw(&v, 8); }
  void F32(float v) { Raw(&v, 4); }
  void U8(std::uint8_t v) { Raw(&v, 1); }
  void Bytes(const char* p, std::size_t n) { os_.write(p, n); }

 private:
  // Little-endian host assumed (x86-64 / aarch64).
  void Raw(const void* p, std::size_t n) {
    os_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  }
  std::ostream& os_;
};

class Reader {
 public:
  explicit Reader(std::vector<char> data) : data_(std::move(data)) {}
  std::uint32_t U32() { return Get<std::uint32_t>(); }
  double F64() { return Get<double>(); }
  float F32() { return Get<float>(); }
  std::uint8_t U8() { return Get<std::uint8_t>(); }
  std::size_t remaining() const { return data_.size() - pos_; }
  const char* cursor() const { return data_.data() + pos_; }
  void Skip(std::size_t n) { pos_ += n; }

 private:
  template <typename T>
  T Get() {
    Require(remaining() >= sizeof(T), ErrorKind::kFormat,
            "SVSET file truncated");
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::vector<char> data_;
  std::size_t pos_ = 0;
};

}  // namespace

void WriteSvsetRecord(const SvsetRecord& r, const std::filesystem::path& path) {
  const auto l = static_cast<std::uint32_t>(r.azimuths.size());
  const auto f = static_cast<std::uint32_t>(r.freqs.size());
  const auto m = static_cast<std::uint32_t>(r.num_mics);
  Require(r.values.size() == f, ErrorKind::kShape,
          "SVSET record frequency count mismatch");
  std::ofstream os(path, std::ios::binary);
  Require(os.good(), ErrorKind::kIo, "cannot write " + path.string());
  Writer w(os);
  w.Bytes("SVST", 4);
  w.U32(kSvsetVersion);
  w.U32(l);
  w.U32(m);
  w.U32(f);
  w.F64(r.radius);
  w.F64(r.elevation);
  for (double a : r.azimuths) w.F64(a);
  for (double fr : r.freqs) w.F64(fr);
  w.U8(r.tag);
  for (std::uint32_t li = 0; li < l; ++li)
    for (std::uint32_t mi = 0; mi < m; ++mi)
      for (std::uint32_t fi = 0; fi < f; ++fi) {
        const Complex v = r.values[fi](li, mi);
        w.F32(static_cast<float>(v.real()));
        w.F32(static_cast<float>(v.imag()));
      }
  Require(os.good(), ErrorKind::kIo, "failed writing " + path.string());
}

SvsetRecord ReadSvsetRecord(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  Require(in.good(), ErrorKind::kIo, "cannot open " + path.string());
  Reader rd(std::vector<char>((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>()));
  Require(rd.remaining() >= 4 && std::memcmp(rd.cursor(), "SVST", 4) == 0,
          ErrorKind::kFormat, "bad SVSET magic in " + path.string());
  rd.Skip(4);
  const std::uint32_t version = rd.U32();
  Require(version == kSvsetVersion, ErrorKind::kFormat,
          "unsupported SVSET version " + std::to_string(version));
  const std::uint32_t l = rd.U32();
  const std::uint32_t m = rd.U32();
  const std::uint32_t f = rd.U32();
  const std::uint64_t entries = std::uint64_t{l} * m * f;
  Require(entries <= kMaxEntries, ErrorKind::kFormat,
          "SVSET dimensions overflow");

  SvsetRecord r;
  r.radius = rd.F64();
  r.elevation = rd.F64();
  Require(rd.remaining() >= (std::uint64_t{l} + f) * 8, ErrorKind::kFormat,
          "SVSET file truncated");
  r.azimuths.resize(l);
  for (auto& a : r.azimuths) a = rd.F64();
  r.freqs.resize(f);
  for (auto& fr : r.freqs) fr = rd.F64();
  r.tag = rd.U8();
  Require(rd.remaining() >= entries * 8, ErrorKind::kFormat,
          "SVSET payload truncated: expected " + std::to_string(entries) +
              " complex entries");
  r.num_mics = m;
  r.values.assign(f, Eigen::MatrixXcd(l, m));
  for (std::uint32_t li = 0; li < l; ++li)
    for (std::uint32_t mi = 0; mi < m; ++mi)
      for (std::uint32_t fi = 0; fi < f; ++fi) {
        const float re = rd.F32();
        const float im = rd.F32();
        r.values[fi](li, mi) = Complex(re, im);
      }
  return r;
}

void SaveSvset(const SteeringVectorSet& svs,
               const std::filesystem::path& path) {
  SvsetRecord r;
  r.radius = svs.grid().radius_m;
  r.elevation = svs.grid().elevation_deg;
  r.azimuths = svs.grid().azimuths_deg;
  r.freqs = svs.freqs_hz();
  r.tag = static_cast<std::uint8_t>(svs.tag());
  r.values = svs.values();
  r.num_mics = svs.num_mics();
  WriteSvsetRecord(r, path);
}

SteeringVectorSet LoadSvset(const std::filesystem::path& path) {
  SvsetRecord r = ReadSvsetRecord(path);
  Require(r.tag <= static_cast<std::uint8_t>(SvSource::kInterpolated),
          ErrorKind::kFormat,
          path.string() + " holds a fitted model, not a steering-vector set");
  DoaGrid grid{std::move(r.azimuths), r.elevation, r.radius};
  try {
    return SteeringVectorSet(std::move(r.values), std::move(grid),
                             std::move(r.freqs), static_cast<SvSource>(r.tag));
  } catch (const Error& e) {
    Fail(ErrorKind::kFormat, path.string() + ": " + e.what());
  }
}

void SaveMeasurements(const SparseSvMeasurements& meas,
                      const std::filesystem::path& path) {
  meas.Validate();
  const auto n = static_cast<std::uint32_t>(meas.size());
  const auto m = static_cast<std::uint32_t>(meas.num_mics());
  const auto f = static_cast<std::uint32_t>(meas.freqs_hz.size());
  std::ofstream os(path, std::ios::binary);
  Require(os.good(), ErrorKind::kIo, "cannot write " + path.string());
  Writer w(os);
  w.Bytes("SVMS", 4);
  w.U32(kSvsetVersion);
  w.U32(n);
  w.U32(m);
  w.U32(f);
  w.F64(meas.radius_m);
  for (const auto& d : meas.directions)
    for (int k = 0; k < 3; ++k) w.F64(d(k));
  for (double fr : meas.freqs_hz) w.F64(fr);
  for (std::uint32_t ni = 0; ni < n; ++ni)
    for (std::uint32_t mi = 0; mi < m; ++mi)
      for (std::uint32_t fi = 0; fi < f; ++fi) {
        const Complex v = meas.values[fi](ni, mi);
        w.F32(static_cast<float>(v.real()));
        w.F32(static_cast<float>(v.imag()));
      }
  Require(os.good(), ErrorKind::kIo, "failed writing " + path.string());
}

SparseSvMeasurements LoadMeasurements(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  Require(in.good(), ErrorKind::kIo, "cannot open " + path.string());
  Reader rd(std::vector<char>((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>()));
  Require(rd.remaining() >= 4 && std::memcmp(rd.cursor(), "SVMS", 4) == 0,
          ErrorKind::kFormat, "bad measurement magic in " + path.string());
  rd.Skip(4);
  const std::uint32_t version = rd.U32();
  Require(version == kSvsetVersion, ErrorKind::kFormat,
          "unsupported measurement version " + std::to_string(version));
  const std::uint32_t n = rd.U32();
  const std::uint32_t m = rd.U32();
  const std::uint32_t f = rd.U32();
  const std::uint64_t entries = std::uint64_t{n} * m * f;
  Require(entries <= kMaxEntries, ErrorKind::kFormat,
          "measurement dimensions overflow");
  SparseSvMeasurements meas;
  meas.radius_m = rd.F64();
  Require(rd.remaining() >= (std::uint64_t{n} * 3 + f) * 8,
          ErrorKind::kFormat, "measurement file truncated");
  meas.directions.resize(n);
  for (auto& d : meas.directions)
    for (int k = 0; k < 3; ++k) d(k) = rd.F64();
  meas.freqs_hz.resize(f);
  for (auto& fr : meas.freqs_hz) fr = rd.F64();
  Require(rd.remaining() >= entries * 8, ErrorKind::kFormat,
          "measurement payload truncated");
  meas.values.assign(f, Eigen::MatrixXcd(n, m));
  for (std::uint32_t ni = 0; ni < n; ++ni)
    for (std::uint32_t mi = 0; mi < m; ++mi)
      for (std::uint32_t fi = 0; fi < f; ++fi) {
        const float re = rd.F32();
        const float im = rd.F32();
        meas.values[fi](ni, mi) = Complex(re, im);
      }
  try {
    meas.Validate();
  } catch (const Error& e) {
    Fail(ErrorKind::kFormat, path.string() + ": " + e.what());
  }
  return meas;
}

}  // namespace shamans
