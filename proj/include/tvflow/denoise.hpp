#pragma once

#include <filesystem>

#include "tvflow/colorspace.hpp"
#include "tvflow/flow.hpp"

namespace tvflow {

enum class Colorspace { ChromaticitySphere, LchCylinder };
enum class BrightnessMode { Flow, Freeze };

struct DenoiseOptions {
  Colorspace colorspace = Colorspace::ChromaticitySphere;
  BrightnessMode brightness = BrightnessMode::Flow;
  FlowConfig flow;  // t_end, eps/schedule, stride
};

struct DenoiseResult {
  Image output;
  // rows (t, tv_energy at eps = 0) of the constrained flow
  std::vector<std::pair<double, double>> energy_rows;
};

DenoiseResult denoise_image(const Image& input, const DenoiseOptions& options);

}  // namespace tvflow
