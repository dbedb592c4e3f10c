#include "facetrack/image.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace facetrack {

Image Image::filled(int w, int h, int c, std::uint8_t value) {
  Image img;
  img.width = w;
  img.height = h;
  img.channels = c;
  img.pixels.assign(std::size_t(w) * h * c, value);
  return img;
}

Affine Affine::translation(double tx, double ty) {
  Affine a;
  a.m[2] = tx;
  a.m[5] = ty;
  return a;
}

Affine Affine::rotation_about(double radians, Point2 c) {
  const double co = std::cos(radians);
  const double si = std::sin(radians);
  Affine a;
  a.m[0] = co;
  a.m[1] = -si;
  a.m[2] = c.x - co * c.x + si * c.y;
  a.m[3] = si;
  a.m[4] = co;
  a.m[5] = c.y - si * c.x - co * c.y;
  return a;
}

Affine Affine::scale_about(double s, Point2 c) {
  Affine a;
  a.m[0] = s;
  a.m[2] = c.x * (1.0 - s);
  a.m[4] = s;
  a.m[5] = c.y * (1.0 - s);
  return a;
}

Affine Affine::shear_about(double shx, Point2 c) {
  Affine a;
  a.m[1] = shx;
  a.m[2] = -shx * c.y;
  return a;
}

Affine Affine::hflip(int width) {
  Affine a;
  a.m[0] = -1.0;
  a.m[2] = double(width - 1);
  return a;
}

Point2 Affine::apply(Point2 p) const {
  return {m[0] * p.x + m[1] * p.y + m[2], m[3] * p.x + m[4] * p.y + m[5]};
}

Affine Affine::then(const Affine& n) const {
  Affine r;
  r.m[0] = n.m[0] * m[0] + n.m[1] * m[3];
  r.m[1] = n.m[0] * m[1] + n.m[1] * m[4];
  r.m[2] = n.m[0] * m[2] + n.m[1] * m[5] + n.m[2];
  r.m[3] = n.m[3] * m[0] + n.m[4] * m[3];
  r.m[4] = n.m[3] * m[1] + n.m[4] * m[4];
  r.m[5] = n.m[3] * m[2] + n.m[4] * m[5] + n.m[5];
  return r;
}

Affine Affine::inverse() const {
  const double det = m[0] * m[4] - m[1] * m[3];
  if (det == 0.0) throw std::invalid_argument("affine transform is singular");
  Affine r;
  r.m[0] = m[4] / det;
  r.m[1] = -m[1] / det;
  r.m[3] = -m[3] / det;
  r.m[4] = m[0] / det;
  r.m[2] = -(r.m[0] * m[2] + r.m[1] * m[5]);
  r.m[5] = -(r.m[3] * m[2] + r.m[4] * m[5]);
  return r;
}

namespace {

int wrap_index(int i, int n, Border border) {
  if (n == 1) return 0;
  if (border == Border::kReplicate) {
    return std::min(std::max(i, 0), n - 1);
  }
  // reflect with edge duplication: -1 -> 0, -2 -> 1, n -> n-1, n+1 -> n-2
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - 1 - i;
  }
  return i;
}

}  // namespace

double sample_bilinear(const Image& img, double x, double y, int c, Border border) {
  const int x0 = int(std::floor(x));
  const int y0 = int(std::floor(y));
  const double fx = x - x0;
  const double fy = y - y0;
  const int xa = wrap_index(x0, img.width, border);
  const int xb = wrap_index(x0 + 1, img.width, border);
  const int ya = wrap_index(y0, img.height, border);
  const int yb = wrap_index(y0 + 1, img.height, border);
  const double v00 = img.at(xa, ya, c);
  const double v10 = img.at(xb, ya, c);
  const double v01 = img.at(xa, yb, c);
  const double v11 = img.at(xb, yb, c);
  const double top = (1.0 - fx) * v00 + fx * v10;
  const double bot = (1.0 - fx) * v01 + fx * v11;
  return (1.0 - fy) * top + fy * bot;
}

Image warp_affine(const Image& src, const Affine& out_to_src, int out_w, int out_h,
                  Border border) {
  Image out = Image::filled(out_w, out_h, src.channels, 0);
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      const Point2 p = out_to_src.apply({double(x), double(y)});
      for (int c = 0; c < src.channels; ++c) {
        const double v = sample_bilinear(src, p.x, p.y, c, border);
        out.at(x, y, c) = std::uint8_t(std::lround(std::min(255.0, std::max(0.0, v))));
      }
    }
  }
  return out;
}

void write_pnm(const Image& img, const std::filesystem::path& path) {
  if (img.channels != 1 && img.channels != 3) {
    throw std::invalid_argument("write_pnm: image must have 1 or 3 channels");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << (img.channels == 1 ? "P5" : "P6") << "\n"
      << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            std::streamsize(img.pixels.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Image read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  if ((magic != "P5" && magic != "P6") || w <= 0 || h <= 0 || maxval != 255) {
    throw std::runtime_error("unsupported PNM file: " + path.string());
  }
  in.get();  // single whitespace after the header
  Image img = Image::filled(w, h, magic == "P5" ? 1 : 3, 0);
  in.read(reinterpret_cast<char*>(img.pixels.data()), std::streamsize(img.pixels.size()));
  if (!in) throw std::runtime_error("truncated PNM file: " + path.string());
  return img;
}

}  // namespace facetrack
