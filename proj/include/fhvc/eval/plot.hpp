// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License.  You
// may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or
// implied.  See the License for the specific language governing
// permissions and limitations under the License.

#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fhvc/eval/sweep.hpp"

namespace fhvc::eval {

class EmptyPlot : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PlotPoint {
  std::string label;
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const PlotPoint&, const PlotPoint&) = default;
};

enum class PlotFormat { csv, svg };

PlotFormat parse_plot_format(const std::string& name);

// Label colours used by the scatter SVG, cycled in first-appearance order.
std::span<const char* const> plot_palette();

// CSV header "n,mel_cd_db,std,runs"; SVG is a line plot with one circle per
// row.
void emit_plot(std::span<const SweepRow> rows, const std::filesystem::path& path, PlotFormat format);
// CSV header "label,x,y"; SVG is a scatter with one circle per point and a
// legend with one entry per label.
void emit_plot(std::span<const PlotPoint> points, const std::filesystem::path& path, PlotFormat format,
               const std::string& title = "");

std::vector<SweepRow> read_sweep_csv(const std::filesystem::path& path);
std::vector<PlotPoint> read_points_csv(const std::filesystem::path& path);

}  // namespace fhvc::eval
