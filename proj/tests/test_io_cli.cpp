#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tvflow/colorspace.hpp"
#include "tvflow/datum.hpp"
#include "tvflow/denoise.hpp"
#include "tvflow/io.hpp"
#include "tvflow/rng.hpp"
#include "tvflow/verify.hpp"

using namespace tvflow;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  static int counter = 0;
  fs::path p = fs::temp_directory_path() / ("tvflow_test_" + std::to_string(counter++));
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(TVFLOW_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

Image salt_pepper_image(int w, int h, std::uint64_t seed) {
  Image img;
  img.width = w;
  img.height = h;
  img.channels = 3;
  img.bit_depth = 8;
  img.data.assign(static_cast<std::size_t>(w) * h * 3, 0);
  Rng rng(seed);
  for (std::size_t p = 0; p < img.pixel_count(); ++p) {
    std::uint16_t base[3] = {180, 90, 60};
    const double roll = rng.uniform();
    for (int k = 0; k < 3; ++k) {
      if (roll < 0.08)
        img.data[p * 3 + k] = 250;
      else if (roll < 0.16)
        img.data[p * 3 + k] = 8;
      else
        img.data[p * 3 + k] = base[k];
    }
  }
  return img;
}

}  // namespace

TEST_CASE("field container round trip is bit exact") {
  auto dom = std::make_shared<GridDomain>(std::vector<int>{6, 4}, 0.25, Boundary::NeumannReflect);
  std::shared_ptr<const Manifold> man = make_manifold("sphere:3:1");
  auto p0 = canonical_point(*man);
  Field u = datum_noise(dom, man, std::span<const double>(p0.data(), 3), 0.3, 99);
  const fs::path dir = temp_dir();
  write_field(dir / "u.tvf", u);
  Field v = read_field(dir / "u.tvf");
  CHECK(v.values == u.values);
  CHECK(v.manifold->name() == "sphere:3:1");
  CHECK(v.domain->same_layout(*dom));

  // masked domain round trip
  std::vector<std::uint8_t> mask(dom->cell_count(), 1);
  mask[0] = 0;
  auto dm = std::make_shared<GridDomain>(std::vector<int>{6, 4}, 0.25,
                                         Boundary::NeumannReflect, mask);
  Field w = datum_noise(dm, man, std::span<const double>(p0.data(), 3), 0.3, 100);
  write_field(dir / "w.tvf", w);
  Field w2 = read_field(dir / "w.tvf");
  CHECK(w2.domain->mask() == mask);
  CHECK(w2.values == w.values);

  CHECK_THROWS_AS(read_field(dir / "missing.tvf"), ConfigError);
}

TEST_CASE("csv output for 1D fields") {
  auto dom = std::make_shared<GridDomain>(std::vector<int>{3}, 0.5, Boundary::NeumannReflect);
  std::shared_ptr<const Manifold> man = make_manifold("euclidean:1");
  Field u = make_field(dom, man);
  u.values = {1.0, 2.0, 3.0};
  const fs::path dir = temp_dir();
  write_field_csv(dir / "u.csv", u);
  const std::string text = slurp(dir / "u.csv");
  CHECK(text.rfind("x,u0\n", 0) == 0);
  CHECK(text.find("0.25,1") != std::string::npos);
}

TEST_CASE("mask container round trip") {
  MaskFile mf;
  mf.dims = {4, 3};
  mf.h = 0.125;
  mf.mask = {0, 1, 1, 0, 1, 1, 1, 1, 0, 1, 1, 0};
  const fs::path dir = temp_dir();
  write_mask(dir / "m.tvm", mf);
  MaskFile r = read_mask(dir / "m.tvm");
  CHECK(r.dims == mf.dims);
  CHECK(r.h == mf.h);
  CHECK(r.mask == mf.mask);
}

TEST_CASE("run config errors name the offending key") {
  const fs::path dir = temp_dir();
  {
    std::ofstream cfg(dir / "bad.json");
    cfg << R"({"dims": [16], "h": 0.0625, "eps": 0.1, "t_end": 0.0,
               "datum": {"generator": "step1d"}})";
  }
  try {
    parse_run_config(dir / "bad.json");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("manifold") != std::string::npos);
  }
  {
    std::ofstream cfg(dir / "bad2.json");
    cfg << R"({"manifold": "euclidean:1", "dims": [16], "h": 0.0625, "eps": 0.1,
               "t_end": 0.0, "datum": {}})";
  }
  CHECK_THROWS_AS(parse_run_config(dir / "bad2.json"), ConfigError);
  {
    std::ofstream cfg(dir / "bad3.json");
    cfg << "{ not json";
  }
  CHECK_THROWS_AS(parse_run_config(dir / "bad3.json"), ConfigError);
}

TEST_CASE("ppm and png round trips") {
  const fs::path dir = temp_dir();
  Image img = salt_pepper_image(13, 9, 7);
  write_ppm(dir / "a.ppm", img);
  Image r1 = read_ppm(dir / "a.ppm");
  CHECK(r1.data == img.data);
  CHECK(r1.width == img.width);

  write_png(dir / "a.png", img);
  Image r2 = read_png(dir / "a.png");
  CHECK(r2.data == img.data);
  CHECK(r2.channels == 3);
  CHECK(r2.bit_depth == 8);

  // 16-bit round trip
  Image img16 = img;
  img16.bit_depth = 16;
  for (auto& v : img16.data) v = static_cast<std::uint16_t>(v * 257);
  write_png(dir / "b.png", img16);
  Image r3 = read_png(dir / "b.png");
  CHECK(r3.bit_depth == 16);
  CHECK(r3.data == img16.data);

  write_ppm(dir / "b.ppm", img16);
  Image r4 = read_ppm(dir / "b.ppm");
  CHECK(r4.data == img16.data);

  CHECK_THROWS_AS(read_image(dir / "a.bmp"), UnsupportedFormat);
}

TEST_CASE("colorspace round trips at t_end = 0 lose at most one LSB") {
  Image img = salt_pepper_image(12, 8, 11);
  auto dom = std::make_shared<GridDomain>(std::vector<int>{12, 8}, 1.0, Boundary::NeumannReflect);

  ChromaticitySplit split = image_to_chromaticity(img, dom);
  CHECK(split.chroma.constraint_residual() <= 1e-12);
  Image back = chromaticity_to_image(split, img);
  for (std::size_t i = 0; i < img.data.size(); ++i)
    CHECK(std::abs(int(back.data[i]) - int(img.data[i])) <= 1);

  Field lch = image_to_lch(img, dom);
  CHECK(lch.constraint_residual() <= 1e-12);
  Image back2 = lch_to_image(lch, img);
  for (std::size_t i = 0; i < img.data.size(); ++i)
    CHECK(std::abs(int(back2.data[i]) - int(img.data[i])) <= 1);
}

TEST_CASE("denoise: identity on solid colors, t_end = 0 lossless") {
  Image solid;
  solid.width = 10;
  solid.height = 6;
  solid.channels = 3;
  solid.bit_depth = 8;
  solid.data.assign(180, 0);
  for (std::size_t p = 0; p < solid.pixel_count(); ++p) {
    solid.data[p * 3 + 0] = 120;
    solid.data[p * 3 + 1] = 200;
    solid.data[p * 3 + 2] = 40;
  }
  DenoiseOptions opt;
  opt.flow.eps = 5e-2;
  opt.flow.t_end = 0.5;
  DenoiseResult res = denoise_image(solid, opt);
  CHECK(res.output.data == solid.data);

  opt.flow.t_end = 0.0;
  Image sp = salt_pepper_image(16, 12, 23);
  DenoiseResult zero = denoise_image(sp, opt);
  for (std::size_t i = 0; i < sp.data.size(); ++i)
    CHECK(std::abs(int(zero.output.data[i]) - int(sp.data[i])) <= 1);
}

TEST_CASE("denoise: salt-and-pepper TV energy drops by at least half") {
  Image sp = salt_pepper_image(32, 32, 37);
  DenoiseOptions opt;
  opt.flow.eps = 5e-2;
  opt.flow.t_end = 0.5;  // the CLI default, calibrated for speckle removal
  opt.flow.snapshot_stride = 50;
  DenoiseResult res = denoise_image(sp, opt);
  REQUIRE(res.energy_rows.size() >= 2);
  CHECK(res.energy_rows.back().second <= 0.5 * res.energy_rows.front().second);
}

TEST_CASE("denoise: two chromaticity regions merge in finite time") {
  // 1D step analogy: plateaus of width W/2 exchange unit flux, so the
  // geodesic gap d closes around t ~ d W / 4 (pixel units)
  Image two;
  two.width = 24;
  two.height = 8;
  two.channels = 3;
  two.bit_depth = 8;
  two.data.assign(static_cast<std::size_t>(24) * 8 * 3, 0);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 24; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * 24 + x;
      if (x < 12) {
        two.data[p * 3 + 0] = 200;
        two.data[p * 3 + 1] = 120;
        two.data[p * 3 + 2] = 120;
      } else {
        two.data[p * 3 + 0] = 120;
        two.data[p * 3 + 1] = 200;
        two.data[p * 3 + 2] = 120;
      }
    }
  DenoiseOptions opt;
  opt.colorspace = Colorspace::ChromaticitySphere;
  opt.brightness = BrightnessMode::Freeze;
  opt.flow.eps = 2e-2;
  opt.flow.t_end = 6.0;
  opt.flow.snapshot_stride = 200;
  DenoiseResult res = denoise_image(two, opt);
  CHECK(res.energy_rows.back().second <= 0.05 * res.energy_rows.front().second);
}

TEST_CASE("cli: run is deterministic byte for byte") {
  const fs::path dir = temp_dir();
  {
    std::ofstream cfg(dir / "run.json");
    cfg << R"({"manifold": "sphere:3:1", "dims": [48], "h": 0.020833333333333332,
               "boundary": "neumann", "eps": 0.05, "t_end": 0.001,
               "snapshot_stride": 500, "seed": 42, "allow_past_existence_window": true,
               "datum": {"generator": "noise", "params": [0.2]},
               "out": ")" << (dir / "out1").string() << R"("})";
  }
  REQUIRE(run_cli("run --config " + (dir / "run.json").string()) == 0);
  REQUIRE(run_cli("run --config " + (dir / "run.json").string() + " --out " +
                  (dir / "out2").string()) == 0);
  CHECK(slurp(dir / "out1" / "diagnostics.csv") == slurp(dir / "out2" / "diagnostics.csv"));
  CHECK(slurp(dir / "out1" / "u_final.tvf") == slurp(dir / "out2" / "u_final.tvf"));
  CHECK(!slurp(dir / "out1" / "run_meta.json").empty());
  // a produced snapshot can be fed back in as a datum file
  Field again = read_field(dir / "out1" / "u_final.tvf");
  CHECK(again.domain->cell_count() == 48);
}

TEST_CASE("cli: minimal euclidean run produces at least two snapshots") {
  const fs::path dir = temp_dir();
  {
    std::ofstream cfg(dir / "run.json");
    cfg << R"({"manifold": "euclidean:1", "dims": [32], "h": 0.03125,
               "eps": 0.1, "t_end": 0.0005, "snapshot_stride": 100,
               "datum": {"generator": "step1d", "params": [0.4]},
               "out": ")" << (dir / "out").string() << R"("})";
  }
  REQUIRE(run_cli("run --config " + (dir / "run.json").string()) == 0);
  std::size_t snaps = 0;
  for (const auto& e : fs::directory_iterator(dir / "out" / "snapshots")) {
    (void)e;
    ++snaps;
  }
  CHECK(snaps >= 2);
  CHECK(fs::exists(dir / "out" / "u_final.csv"));
}

TEST_CASE("cli: failure modes") {
  const fs::path dir = temp_dir();
  {
    std::ofstream cfg(dir / "nomanifold.json");
    cfg << R"({"dims": [16], "h": 0.0625, "eps": 0.1, "t_end": 0.0,
               "datum": {"generator": "step1d"}})";
  }
  CHECK(run_cli("run --config " + (dir / "nomanifold.json").string()) != 0);
  CHECK(run_cli("verify --suite no-such-suite") != 0);
}

TEST_CASE("cli: approx-domain emits a loadable mask") {
  const fs::path dir = temp_dir();
  {
    std::ofstream body(dir / "square.body");
    body << "2\n"
         << "1 0 1\n"
         << "-1 0 0\n"
         << "0 1 1\n"
         << "0 -1 0\n";
  }
  REQUIRE(run_cli("approx-domain " + (dir / "square.body").string() +
                  " --eps 0.05 --dims 64,64 --spacing 0.015625 --out " +
                  (dir / "mask.tvm").string()) == 0);
  MaskFile mf = read_mask(dir / "mask.tvm");
  CHECK(mf.dims == std::vector<int>{64, 64});
  std::size_t inside = 0;
  for (auto v : mf.mask) inside += v;
  CHECK(inside > 0);
  // the exported mask builds a valid masked domain
  CHECK_NOTHROW(GridDomain(mf.dims, mf.h, Boundary::NeumannReflect, mf.mask));
}

TEST_CASE("cli: approx-domain mask feeds a masked run") {
  const fs::path dir = temp_dir();
  {
    std::ofstream body(dir / "square.body");
    body << "2\n1 0 1\n-1 0 0\n0 1 1\n0 -1 0\n";
  }
  REQUIRE(run_cli("approx-domain " + (dir / "square.body").string() +
                  " --eps 0.05 --dims 32,32 --spacing 0.03125 --out " +
                  (dir / "mask.tvm").string()) == 0);
  {
    std::ofstream cfg(dir / "masked.json");
    cfg << R"({"manifold": "euclidean:1", "dims": [32, 32], "h": 0.03125,
               "boundary": "neumann", "mask": ")" << (dir / "mask.tvm").string() << R"(",
               "eps": 0.05, "t_end": 0.0002, "snapshot_stride": 100,
               "datum": {"generator": "noise", "params": [0.3]}, "seed": 3,
               "out": ")" << (dir / "mout").string() << R"("})";
  }
  REQUIRE(run_cli("run --config " + (dir / "masked.json").string()) == 0);
  Field uf = read_field(dir / "mout" / "u_final.tvf");
  CHECK(uf.domain->has_mask());
  CHECK(uf.domain->inside_count() > 0);
}

TEST_CASE("run config accepts an image datum") {
  const fs::path dir = temp_dir();
  Image img = salt_pepper_image(12, 10, 55);
  write_ppm(dir / "in.ppm", img);
  {
    std::ofstream cfg(dir / "img.json");
    cfg << R"({"manifold": "sphere:3:1", "dims": [12, 10], "h": 1.0,
               "eps": 0.05, "t_end": 0.05, "snapshot_stride": 5,
               "allow_past_existence_window": true,
               "datum": {"image": ")" << (dir / "in.ppm").string() << R"(",
                          "colorspace": "chromaticity_sphere"},
               "out": ")" << (dir / "iout").string() << R"("})";
  }
  RunConfig rc = parse_run_config(dir / "img.json");
  PreparedRun pr = prepare_run(rc);
  CHECK(pr.u0.manifold->name() == "sphere:3:1");
  CHECK(pr.u0.constraint_residual() <= 1e-12);
  // mismatched manifold is named in the error
  {
    std::ofstream cfg(dir / "img2.json");
    cfg << R"({"manifold": "euclidean:1", "dims": [12, 10], "h": 1.0,
               "eps": 0.05, "t_end": 0.0,
               "datum": {"image": ")" << (dir / "in.ppm").string() << R"("},
               "out": "x"})";
  }
  CHECK_THROWS_AS(prepare_run(parse_run_config(dir / "img2.json")), ConfigError);
}

TEST_CASE("verify: unknown suite throws, known suites enumerate") {
  CHECK_THROWS_AS(run_suite("definitely-not-a-suite"), UnknownSuite);
  const auto names = suite_names();
  CHECK(std::find(names.begin(), names.end(), "energy") != names.end());
  CHECK(std::find(names.begin(), names.end(), "extinction-1d") != names.end());
  // ball/fmu alias onto the shared small-ball run
  const auto checks = run_suite("ball");
  bool has6 = false, has7 = false;
  for (const auto& c : checks) {
    has6 = has6 || c.criterion == 6;
    has7 = has7 || c.criterion == 7;
  }
  CHECK(has6);
  CHECK(has7);
}
