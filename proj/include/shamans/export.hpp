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

#ifndef SHAMANS_EXPORT_HPP_
#define SHAMANS_EXPORT_HPP_

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "shamans/baselines.hpp"
#include "shamans/stable.hpp"

namespace shamans {

// RFC 4180 field quoting: fields containing a comma, quote, CR or LF are
// wrapped in quotes with embedded quotes doubled.
std::string CsvField(const std::string& field);
void WriteCsvRow(std::ostream& os, const std::vector<std::string>& fields);

// Shortest round-trip decimal representation.
std::string FormatDouble(double value);

// Rows "azimuth_deg,upsilon".
void WriteMeasureCsv(const SpatialMeasure& measure, std::ostream& os);
// Rows "azimuth_deg,value,method_tag".
void WriteSpectrumCsv(const AngularSpectrum& spectrum, std::ostream& os);

struct MeasureMetadata {
  double alpha = 2.0;
  double beta = 1.0;
  double lambda = 1e-3;
  int iterations = 500;
  double p = 1.0;
  Index freqs_used = 0;
  Index frames = 0;
};

nlohmann::json ToJson(const MeasureMetadata& meta);

// Writes text, creating parent directories.
void WriteTextFile(const std::filesystem::path& path, const std::string& text);

}  // namespace shamans

#endif  // SHAMANS_EXPORT_HPP_
