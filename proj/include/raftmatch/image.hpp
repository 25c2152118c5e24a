#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace raftmatch {

// Row-major grayscale image, intensities in [0,1]. Stored as float; all
// sampling math is done in double.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<float> px;

  Image() = default;
  Image(int w, int h, float fill = 0.0f)
      : width(w), height(h), px(static_cast<size_t>(w) * h, fill) {}

  float at(int x, int y) const { return px[static_cast<size_t>(y) * width + x]; }
  float& at(int x, int y) { return px[static_cast<size_t>(y) * width + x]; }

  // Continuous coordinates: pixel (i,j) covers [i,i+1)x[j,j+1), center at
  // (i+0.5, j+0.5). Out-of-range samples clamp to the edge pixel.
  double sample_bilinear(double x, double y) const;

  bool same_dims(const Image& o) const {
    return width == o.width && height == o.height;
  }
};

// binary PGM (P5), 8-bit
void write_pgm(const std::string& path, const Image& img);
Image read_pgm(const std::string& path);

double mean_abs_diff(const Image& a, const Image& b);
// PSNR in dB over the interior, ignoring `border` pixels on each side
double psnr(const Image& a, const Image& b, int border = 0);
// Pearson correlation over pixels where mask (if given) is zero
double masked_correlation(const Image& a, const Image& b, const Image* mask = nullptr);

}  // namespace raftmatch
