#include "tvflow/denoise.hpp"

namespace tvflow {

namespace {

std::vector<std::pair<double, double>> tv0_rows(const Trajectory& traj) {
  std::vector<std::pair<double, double>> rows;
  rows.reserve(traj.snapshots.size());
  for (const auto& snap : traj.snapshots) rows.emplace_back(snap.t, tv_energy(snap.u, 0.0));
  return rows;
}

}  // namespace

DenoiseResult denoise_image(const Image& input, const DenoiseOptions& options) {
  if (input.bit_depth != 8 && input.bit_depth != 16)
    throw UnsupportedFormat("denoise: 8/16-bit images only");
  auto dom = std::make_shared<GridDomain>(std::vector<int>{input.width, input.height}, 1.0,
                                          Boundary::NeumannReflect);
  FlowConfig cfg = options.flow;
  cfg.stop_at_extinction = true;
  cfg.allow_past_existence_window = true;  // image data is not a small-ball datum

  DenoiseResult res;
  if (options.colorspace == Colorspace::ChromaticitySphere) {
    ChromaticitySplit split = image_to_chromaticity(input, dom);
    Trajectory traj = run_flow(split.chroma, cfg);
    res.energy_rows = tv0_rows(traj);
    ChromaticitySplit flowed;
    flowed.chroma = traj.final();
    if (options.brightness == BrightnessMode::Flow && cfg.t_end > 0.0) {
      Trajectory btraj = run_flow(split.brightness, cfg);
      flowed.brightness = btraj.final();
    } else {
      flowed.brightness = split.brightness;
    }
    res.output = chromaticity_to_image(flowed, input);
    return res;
  }

  Field u0 = image_to_lch(input, dom);
  Trajectory traj = run_flow(u0, cfg);
  res.energy_rows = tv0_rows(traj);
  res.output = lch_to_image(traj.final(), input);
  return res;
}

}  // namespace tvflow
