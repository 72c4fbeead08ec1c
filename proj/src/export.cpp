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

#include "shamans/export.hpp"

#include <charconv>
#include <fstream>

namespace shamans {

std::string CsvField(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void WriteCsvRow(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) os << ',';
    os << CsvField(fields[i]);
  }
  os << "\r\n";
}

std::string FormatDouble(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

void WriteMeasureCsv(const SpatialMeasure& measure, std::ostream& os) {
  WriteCsvRow(os, {"azimuth_deg", "upsilon"});
  for (Index l = 0; l < measure.upsilon.size(); ++l)
    WriteCsvRow(os, {FormatDouble(measure.grid.azimuths_deg[l]),
                     FormatDouble(measure.upsilon(l))});
}

void WriteSpectrumCsv(const AngularSpectrum& spectrum, std::ostream& os) {
  WriteCsvRow(os, {"azimuth_deg", "value", "method_tag"});
  for (Index l = 0; l < spectrum.values.size(); ++l)
    WriteCsvRow(os, {FormatDouble(spectrum.grid.azimuths_deg[l]),
                     FormatDouble(spectrum.values(l)), spectrum.method_tag});
}

nlohmann::json ToJson(const MeasureMetadata& meta) {
  return {{"alpha", meta.alpha},         {"beta", meta.beta},
          {"lambda", meta.lambda},       {"iterations", meta.iterations},
          {"p", meta.p},                 {"F_prime", meta.freqs_used},
          {"T", meta.frames}};
}

void WriteTextFile(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  Require(os.good(), ErrorKind::kIo, "cannot write " + path.string());
  os << text;
  Require(os.good(), ErrorKind::kIo, "failed writing " + path.string());
}

}  // namespace shamans
