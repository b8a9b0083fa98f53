#include "tvflow/colorspace.hpp"

#include <algorithm>
#include <cmath>

namespace tvflow {

namespace {

void check_geometry(const Image& img, const GridDomain& dom) {
  if (dom.dim() != 2 || dom.extents()[0] != img.width || dom.extents()[1] != img.height)
    throw ConfigError("colorspace: grid does not match image geometry");
  if (img.channels < 3) throw UnsupportedFormat("colorspace: RGB image required");
}

// sRGB <-> CIELAB (D65), components in [0, 1]
double srgb_to_linear(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}
double linear_to_srgb(double c) {
  return c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}

constexpr double kXn = 0.95047, kYn = 1.0, kZn = 1.08883;

double lab_f(double t) {
  constexpr double d = 6.0 / 29.0;
  return t > d * d * d ? std::cbrt(t) : t / (3.0 * d * d) + 4.0 / 29.0;
}
double lab_finv(double t) {
  constexpr double d = 6.0 / 29.0;
  return t > d ? t * t * t : 3.0 * d * d * (t - 4.0 / 29.0);
}

void rgb_to_lab(const double rgb[3], double lab[3]) {
  const double r = srgb_to_linear(rgb[0]), g = srgb_to_linear(rgb[1]), b = srgb_to_linear(rgb[2]);
  const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
  const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
  const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
  const double fx = lab_f(x / kXn), fy = lab_f(y / kYn), fz = lab_f(z / kZn);
  lab[0] = 116.0 * fy - 16.0;
  lab[1] = 500.0 * (fx - fy);
  lab[2] = 200.0 * (fy - fz);
}

void lab_to_rgb(const double lab[3], double rgb[3]) {
  const double fy = (lab[0] + 16.0) / 116.0;
  const double fx = fy + lab[1] / 500.0;
  const double fz = fy - lab[2] / 200.0;
  const double x = kXn * lab_finv(fx), y = kYn * lab_finv(fy), z = kZn * lab_finv(fz);
  const double r = 3.2404542 * x - 1.5371385 * y - 0.4985314 * z;
  const double g = -0.9692660 * x + 1.8760108 * y + 0.0415560 * z;
  const double b = 0.0556434 * x - 0.2040259 * y + 1.0572252 * z;
  rgb[0] = std::clamp(linear_to_srgb(r), 0.0, 1.0);
  rgb[1] = std::clamp(linear_to_srgb(g), 0.0, 1.0);
  rgb[2] = std::clamp(linear_to_srgb(b), 0.0, 1.0);
}

}  // namespace

ChromaticitySplit image_to_chromaticity(const Image& img, std::shared_ptr<const GridDomain> dom) {
  check_geometry(img, *dom);
  ChromaticitySplit split;
  split.chroma = make_field(dom, make_manifold("sphere:3:1"));
  split.brightness = make_field(dom, make_manifold("euclidean:1"));
  const double maxv = img.max_value();
  for (std::size_t p = 0; p < img.pixel_count(); ++p) {
    double rgb[3];
    for (int k = 0; k < 3; ++k) {
      double v = img.data[p * img.channels + k] / maxv;
      rgb[k] = v;
    }
    if (rgb[0] == 0.0 && rgb[1] == 0.0 && rgb[2] == 0.0)
      rgb[0] = rgb[1] = rgb[2] = 1.0 / maxv;  // lift zero pixels one unit
    const double norm = std::sqrt(rgb[0] * rgb[0] + rgb[1] * rgb[1] + rgb[2] * rgb[2]);
    double* c = split.chroma.cell(p);
    for (int k = 0; k < 3; ++k) c[k] = rgb[k] / norm;
    split.brightness.values[p] = norm;
  }
  return split;
}

Image chromaticity_to_image(const ChromaticitySplit& split, const Image& reference) {
  Image out = reference;
  const double maxv = out.max_value();
  for (std::size_t p = 0; p < out.pixel_count(); ++p) {
    const double* c = split.chroma.cell(p);
    const double norm = split.brightness.values[p];
    for (int k = 0; k < 3; ++k) {
      const double v = std::clamp(c[k] * norm, 0.0, 1.0);
      out.data[p * out.channels + k] = static_cast<std::uint16_t>(std::lround(v * maxv));
    }
  }
  return out;
}

Field image_to_lch(const Image& img, std::shared_ptr<const GridDomain> dom) {
  check_geometry(img, *dom);
  Field u = make_field(dom, make_manifold("cylinder:2"));
  const double maxv = img.max_value();
  for (std::size_t p = 0; p < img.pixel_count(); ++p) {
    double rgb[3], lab[3];
    for (int k = 0; k < 3; ++k) rgb[k] = img.data[p * img.channels + k] / maxv;
    rgb_to_lab(rgb, lab);
    const double chroma = std::hypot(lab[1], lab[2]);
    const double hue = chroma > 1e-12 ? std::atan2(lab[2], lab[1]) : 0.0;
    double* c = u.cell(p);
    c[0] = std::cos(hue);
    c[1] = std::sin(hue);
    c[2] = lab[0] / 100.0;
    c[3] = chroma / 100.0;
  }
  return u;
}

Image lch_to_image(const Field& u, const Image& reference) {
  Image out = reference;
  const double maxv = out.max_value();
  for (std::size_t p = 0; p < out.pixel_count(); ++p) {
    const double* c = u.cell(p);
    const double hue = std::atan2(c[1], c[0]);
    double lab[3], rgb[3];
    lab[0] = c[2] * 100.0;
    const double chroma = std::max(0.0, c[3] * 100.0);
    lab[1] = chroma * std::cos(hue);
    lab[2] = chroma * std::sin(hue);
    lab_to_rgb(lab, rgb);
    for (int k = 0; k < 3; ++k)
      out.data[p * out.channels + k] = static_cast<std::uint16_t>(std::lround(rgb[k] * maxv));
  }
  return out;
}

}  // namespace tvflow
