#include <cmath>
#include <cstdio>
#include <string>

#include "hypersem/oracle.hpp"
#include "hypersem/random.hpp"

namespace hypersem::oracle {

namespace {

constexpr double kWidth = 200.0;
constexpr double kHeight = 240.0;
constexpr double kCenterX = 100.0;
constexpr double kCenterY = 125.0;
constexpr int kMaxWrinkles = 10;
constexpr int kMaxJitter = 40;
constexpr double kGlassesThreshold = 0.05;

// Fixed three-decimal output keeps documents byte-stable.
std::string num(double v) {
  if (std::abs(v) < 0.0005) v = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

double feature(const FaceParams& p, std::size_t i) {
  return i < p.identity_features.size() ? std::tanh(p.identity_features[i]) : 0.0;
}

// HSL with fixed saturation/lightness to an sRGB hex triplet (SVG 1.1 has no hsl()).
std::string skin_color(double hue) {
  constexpr double sat = 0.55;
  constexpr double light = 0.72;
  const double c = (1.0 - std::abs(2.0 * light - 1.0)) * sat;
  const double h = hue / 60.0;
  const double x = c * (1.0 - std::abs(std::fmod(h, 2.0) - 1.0));
  double r = 0.0, g = 0.0, b = 0.0;
  if (h < 1.0) { r = c; g = x; }
  else { r = x; g = c; }
  const double m = light - c / 2.0;
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(std::lround(255.0 * (r + m))),
                static_cast<int>(std::lround(255.0 * (g + m))),
                static_cast<int>(std::lround(255.0 * (b + m))));
  return buf;
}

double unit_hash(std::uint64_t a, std::uint64_t b) {
  return static_cast<double>(splitmix64(derive_seed(a, {b})) >> 11) * 0x1.0p-53;
}

}  // namespace

std::string render(const FaceParams& input) {
  const FaceParams p = input.clamped();
  const double hue = 28.0 + 14.0 * feature(p, 0);
  const double eye_gap = 22.0 * (1.0 + 0.2 * feature(p, 1));
  const double head_rx = 58.0 * p.jaw_width;
  const double head_ry = 82.0 * (1.0 + 0.1 * feature(p, 2));
  const double shift = 0.5 * p.yaw;  // yaw moves the inner features sideways
  const double eye_y = kCenterY - 12.0;
  const double mouth_y = kCenterY + 38.0;

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + num(kWidth) +
         "\" height=\"" + num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + " " +
         num(kHeight) + "\">\n";
  svg += "  <rect id=\"background\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
         "\" fill=\"#f4f4f4\"/>\n";
  svg += "  <ellipse id=\"head\" cx=\"" + num(kCenterX) + "\" cy=\"" + num(kCenterY) +
         "\" rx=\"" + num(head_rx) + "\" ry=\"" + num(head_ry) + "\" fill=\"" + skin_color(hue) + "\" stroke=\"#553322\" stroke-width=\"2\"/>\n";

  svg += "  <g id=\"eyes\" fill=\"#222222\">\n";
  for (double side : {-1.0, 1.0}) {
    svg += "    <circle cx=\"" + num(kCenterX + shift + side * eye_gap) + "\" cy=\"" + num(eye_y) +
           "\" r=\"5.000\"/>\n";
  }
  svg += "  </g>\n";

  svg += "  <path id=\"nose\" d=\"M " + num(kCenterX + shift) + " " + num(eye_y + 8.0) + " L " +
         num(kCenterX + 1.3 * shift - 5.0) + " " + num(eye_y + 30.0) + " L " +
         num(kCenterX + shift + 3.0) + " " + num(eye_y + 30.0) +
         "\" fill=\"none\" stroke=\"#553322\" stroke-width=\"1.5\"/>\n";

  svg += "  <path id=\"mouth\" d=\"M " + num(kCenterX + shift - 20.0) + " " + num(mouth_y) +
         " Q " + num(kCenterX + shift) + " " + num(mouth_y + 18.0 * p.mouth_curve) + " " +
         num(kCenterX + shift + 20.0) + " " + num(mouth_y) +
         "\" fill=\"none\" stroke=\"#aa3333\" stroke-width=\"3\"/>\n";

  const long wrinkles = std::lround(kMaxWrinkles * p.wrinkle_density);
  svg += "  <g id=\"wrinkles\" stroke=\"#775544\" stroke-width=\"1\" fill=\"none\">\n";
  for (long i = 0; i < wrinkles; ++i) {
    const double row = static_cast<double>(i / 2);
    const double side = i % 2 == 0 ? -1.0 : 1.0;
    const double y = kCenterY - 55.0 + 5.0 * row;
    const double x0 = kCenterX + shift + side * 6.0;
    svg += "    <path class=\"wrinkle\" d=\"M " + num(x0) + " " + num(y) + " Q " +
           num(x0 + side * 12.0) + " " + num(y - 3.0) + " " + num(x0 + side * 24.0) + " " +
           num(y) + "\"/>\n";
  }
  svg += "  </g>\n";

  if (p.glasses_opacity > kGlassesThreshold) {
    svg += "  <g id=\"glasses\" opacity=\"" + num(p.glasses_opacity) +
           "\" fill=\"none\" stroke=\"#111111\" stroke-width=\"2.5\">\n";
    for (double side : {-1.0, 1.0}) {
      svg += "    <circle cx=\"" + num(kCenterX + shift + side * eye_gap) + "\" cy=\"" +
             num(eye_y) + "\" r=\"13.000\"/>\n";
    }
    svg += "    <line x1=\"" + num(kCenterX + shift - eye_gap + 13.0) + "\" y1=\"" + num(eye_y) +
           "\" x2=\"" + num(kCenterX + shift + eye_gap - 13.0) + "\" y2=\"" + num(eye_y) +
           "\"/>\n";
    svg += "  </g>\n";
  }

  const long jitter = std::lround(kMaxJitter * p.noise_level);
  if (jitter > 0) {
    svg += "  <g id=\"artifacts\" stroke=\"#ff00aa\" stroke-width=\"1.5\" opacity=\"" +
           num(0.3 + 0.7 * p.noise_level) + "\">\n";
    for (long i = 0; i < jitter; ++i) {
      const auto k = static_cast<std::uint64_t>(i);
      const double x = kCenterX - head_rx + 2.0 * head_rx * unit_hash(k, 1);
      const double y = kCenterY - head_ry + 2.0 * head_ry * unit_hash(k, 2);
      const double dx = 24.0 * p.noise_level * (unit_hash(k, 3) - 0.5);
      const double dy = 24.0 * p.noise_level * (unit_hash(k, 4) - 0.5);
      svg += "    <line class=\"jitter\" x1=\"" + num(x) + "\" y1=\"" + num(y) + "\" x2=\"" +
             num(x + dx) + "\" y2=\"" + num(y + dy) + "\"/>\n";
    }
    svg += "  </g>\n";
  }

  svg += "</svg>\n";
  return svg;
}

}  // namespace hypersem::oracle
