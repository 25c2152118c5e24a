#include "raftmatch/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "raftmatch/errors.hpp"

namespace raftmatch {

double Image::sample_bilinear(double x, double y) const {
  double u = x - 0.5;
  double v = y - 0.5;
  u = std::clamp(u, 0.0, static_cast<double>(width - 1));
  v = std::clamp(v, 0.0, static_cast<double>(height - 1));
  int x0 = static_cast<int>(u);
  int y0 = static_cast<int>(v);
  int x1 = std::min(x0 + 1, width - 1);
  int y1 = std::min(y0 + 1, height - 1);
  double fx = u - x0;
  double fy = v - y0;
  double top = (1.0 - fx) * at(x0, y0) + fx * at(x1, y0);
  double bot = (1.0 - fx) * at(x0, y1) + fx * at(x1, y1);
  return (1.0 - fy) * top + fy * bot;
}

void write_pgm(const std::string& path, const Image& img) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open for write: " + path);
  f << "P5\n" << img.width << " " << img.height << "\n255\n";
  std::vector<unsigned char> row(img.width);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      double v = std::clamp(static_cast<double>(img.at(x, y)), 0.0, 1.0);
      row[x] = static_cast<unsigned char>(std::lround(v * 255.0));
    }
    f.write(reinterpret_cast<const char*>(row.data()), img.width);
  }
  if (!f) throw Error("write failed: " + path);
}

Image read_pgm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open: " + path);
  std::string magic;
  f >> magic;
  if (magic != "P5") throw Error("not a binary PGM: " + path);
  auto next_int = [&f, &path]() {
    // skip whitespace and '#' comments
    int c = f.get();
    while (c == ' ' || c == '\n' || c == '\r' || c == '\t' || c == '#') {
      if (c == '#') {
        while (c != '\n' && c != EOF) c = f.get();
      }
      c = f.get();
    }
    int val = 0;
    bool any = false;
    while (c >= '0' && c <= '9') {
      val = val * 10 + (c - '0');
      any = true;
      c = f.get();
    }
    if (!any) throw Error("malformed PGM header: " + path);
    return val;
  };
  int w = next_int();
  int h = next_int();
  int maxval = next_int();
  if (maxval != 255) throw Error("unsupported PGM maxval: " + path);
  Image img(w, h);
  std::vector<unsigned char> row(w);
  for (int y = 0; y < h; ++y) {
    f.read(reinterpret_cast<char*>(row.data()), w);
    if (!f) throw Error("truncated PGM: " + path);
    for (int x = 0; x < w; ++x) img.at(x, y) = row[x] / 255.0f;
  }
  return img;
}

double mean_abs_diff(const Image& a, const Image& b) {
  if (!a.same_dims(b)) throw DimMismatch("mean_abs_diff: size mismatch");
  double s = 0.0;
  for (size_t i = 0; i < a.px.size(); ++i) s += std::abs(double(a.px[i]) - double(b.px[i]));
  return a.px.empty() ? 0.0 : s / a.px.size();
}

double psnr(const Image& a, const Image& b, int border) {
  if (!a.same_dims(b)) throw DimMismatch("psnr: size mismatch");
  double se = 0.0;
  int n = 0;
  for (int y = border; y < a.height - border; ++y) {
    for (int x = border; x < a.width - border; ++x) {
      double d = double(a.at(x, y)) - double(b.at(x, y));
      se += d * d;
      ++n;
    }
  }
  if (n == 0) return 0.0;
  double mse = se / n;
  if (mse <= 0.0) return 1e9;  // identical
  return 10.0 * std::log10(1.0 / mse);
}

double masked_correlation(const Image& a, const Image& b, const Image* mask) {
  if (!a.same_dims(b)) throw DimMismatch("masked_correlation: size mismatch");
  double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  int n = 0;
  for (size_t i = 0; i < a.px.size(); ++i) {
    if (mask && mask->px[i] > 0.5f) continue;
    double x = a.px[i], y = b.px[i];
    sa += x;
    sb += y;
    saa += x * x;
    sbb += y * y;
    sab += x * y;
    ++n;
  }
  if (n < 2) return 0.0;
  double cov = sab - sa * sb / n;
  double va = saa - sa * sa / n;
  double vb = sbb - sb * sb / n;
  if (va <= 0 || vb <= 0) return 0.0;
  return cov / std::sqrt(va * vb);
}

}  // namespace raftmatch
