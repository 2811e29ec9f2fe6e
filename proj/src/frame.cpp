#include "evt/frame.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "evt/parallel.hpp"

namespace evt {

bool is_negative(FrameKind k) {
  return k == FrameKind::NegativeTimeSurface || k == FrameKind::NegativeEventMap;
}

const char* to_string(FrameKind k) {
  switch (k) {
    case FrameKind::TimeSurface: return "ts";
    case FrameKind::EventMap: return "em";
    case FrameKind::NegativeTimeSurface: return "neg_ts";
    case FrameKind::NegativeEventMap: return "neg_em";
  }
  return "?";
}

EventFrame negate(const EventFrame& frame) {
  if (is_negative(frame.kind)) throw std::invalid_argument("negate: frame is already negative");
  EventFrame out(frame.width, frame.height, frame.trigger_time,
                 frame.kind == FrameKind::TimeSurface ? FrameKind::NegativeTimeSurface
                                                      : FrameKind::NegativeEventMap);
  for (std::size_t i = 0; i < frame.values.size(); ++i) out.values[i] = 255.0 - frame.values[i];
  return out;
}

namespace {

std::vector<double> gaussian_kernel(int kernel, double sigma) {
  const int r = kernel / 2;
  std::vector<double> k(kernel);
  double sum = 0.0;
  for (int i = -r; i <= r; ++i) {
    k[i + r] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    sum += k[i + r];
  }
  for (double& v : k) v /= sum;
  return k;
}

}  // namespace

EventFrame gaussian_blur(const EventFrame& frame, int kernel, double sigma) {
  if (!is_negative(frame.kind)) throw std::invalid_argument("gaussian_blur: expected a negative frame");
  if (kernel < 1 || kernel % 2 == 0) throw std::invalid_argument("gaussian_blur: kernel must be odd");
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_blur: sigma must be positive");

  const std::vector<double> k = gaussian_kernel(kernel, sigma);
  const int r = kernel / 2;
  const int w = frame.width, h = frame.height;

  EventFrame tmp(w, h, frame.trigger_time, frame.kind);
  EventFrame out(w, h, frame.trigger_time, frame.kind);

  // Horizontal then vertical pass inside one parallel region; borders
  // replicate the edge pixel. The implicit barrier between the loops
  // orders the passes.
#ifdef EVT_HAVE_OPENMP
#pragma omp parallel num_threads(par::max_threads()) if (par::enabled())
#endif
  {
#ifdef EVT_HAVE_OPENMP
#pragma omp for schedule(static)
#endif
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int i = -r; i <= r; ++i) {
          const int xs = std::clamp(x + i, 0, w - 1);
          acc += k[i + r] * frame.at(xs, y);
        }
        tmp.at(x, y) = acc;
      }
    }
#ifdef EVT_HAVE_OPENMP
#pragma omp for schedule(static)
#endif
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int i = -r; i <= r; ++i) {
          const int ys = std::clamp(y + i, 0, h - 1);
          acc += k[i + r] * tmp.at(x, ys);
        }
        out.at(x, y) = acc;
      }
    }
  }
  return out;
}

std::optional<double> bilinear_sample(const EventFrame& frame, const Vec2& p) {
  const double x = p.x(), y = p.y();
  if (!(x >= 0.0 && x <= frame.width - 1.0 && y >= 0.0 && y <= frame.height - 1.0)) {
    return std::nullopt;
  }
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, frame.width - 1);
  const int y1 = std::min(y0 + 1, frame.height - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double v00 = frame.at(x0, y0), v10 = frame.at(x1, y0);
  const double v01 = frame.at(x0, y1), v11 = frame.at(x1, y1);
  return (1.0 - fy) * ((1.0 - fx) * v00 + fx * v10) + fy * ((1.0 - fx) * v01 + fx * v11);
}

std::optional<Vec2> image_gradient(const EventFrame& frame, const Vec2& p) {
  const double x = p.x(), y = p.y();
  if (!(x >= 1.0 && x <= frame.width - 2.0 && y >= 1.0 && y <= frame.height - 2.0)) {
    return std::nullopt;
  }
  const double gx = (*bilinear_sample(frame, {x + 1.0, y}) - *bilinear_sample(frame, {x - 1.0, y})) * 0.5;
  const double gy = (*bilinear_sample(frame, {x, y + 1.0}) - *bilinear_sample(frame, {x, y - 1.0})) * 0.5;
  return Vec2(gx, gy);
}

void write_pgm(const std::filesystem::path& path, const EventFrame& frame, bool binary) {
  std::FILE* f = std::fopen(path.string().c_str(), binary ? "wb" : "w");
  if (!f) throw std::runtime_error("cannot write pgm: " + path.string());
  std::fprintf(f, "%s\n%d %d\n255\n", binary ? "P5" : "P2", frame.width, frame.height);
  for (int y = 0; y < frame.height; ++y) {
    for (int x = 0; x < frame.width; ++x) {
      const int v = static_cast<int>(std::lround(std::clamp(frame.at(x, y), 0.0, 255.0)));
      if (binary) {
        const unsigned char b = static_cast<unsigned char>(v);
        std::fwrite(&b, 1, 1, f);
      } else {
        std::fprintf(f, "%d%c", v, x + 1 == frame.width ? '\n' : ' ');
      }
    }
  }
  std::fclose(f);
}

}  // namespace evt
