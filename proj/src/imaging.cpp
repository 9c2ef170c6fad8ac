#include "hwr/imaging.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "hwr/error.hpp"
#include "hwr/random.hpp"

namespace hwr {

GrayImage::GrayImage(int width, int height, std::uint8_t fill) {
  if (width <= 0 || height <= 0)
    throw Error(ErrorCode::dimension, "image dimensions must be positive");
  width_ = width;
  height_ = height;
  pixels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> pixels) {
  if (width <= 0 || height <= 0)
    throw Error(ErrorCode::dimension, "image dimensions must be positive");
  if (pixels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw Error(ErrorCode::dimension, "pixel count does not match width x height");
  width_ = width;
  height_ = height;
  pixels_ = std::move(pixels);
}

GrayImage GrayImage::crop(int x0, int y0, int w, int h) const {
  if (x0 < 0 || y0 < 0 || w <= 0 || h <= 0 || x0 + w > width_ || y0 + h > height_)
    throw Error(ErrorCode::dimension, "crop rectangle outside image");
  GrayImage out(w, h);
  for (int y = 0; y < h; ++y)
    std::copy_n(pixels_.begin() + static_cast<std::ptrdiff_t>(index(x0, y0 + y)), w,
                out.pixels_.begin() + static_cast<std::ptrdiff_t>(out.index(0, y)));
  return out;
}

std::size_t ink_count(const GrayImage& img) {
  return static_cast<std::size_t>(
      std::count_if(img.pixels().begin(), img.pixels().end(), is_ink));
}

// ---------------------------------------------------------------------------

int otsu_threshold(const GrayImage& img) {
  if (img.empty()) throw Error(ErrorCode::dimension, "empty image");
  std::array<double, 256> hist{};
  for (auto v : img.pixels()) hist[v] += 1.0;
  const double total = static_cast<double>(img.pixels().size());

  double sum_all = 0.0;
  for (int i = 0; i < 256; ++i) sum_all += i * hist[i];

  double best = -1.0;
  int best_t = 0;
  double w0 = 0.0, sum0 = 0.0;
  for (int t = 0; t < 256; ++t) {
    w0 += hist[t];
    sum0 += t * hist[t];
    const double w1 = total - w0;
    double between = 0.0;
    if (w0 > 0.0 && w1 > 0.0) {
      const double m0 = sum0 / w0;
      const double m1 = (sum_all - sum0) / w1;
      between = w0 * w1 * (m0 - m1) * (m0 - m1) / (total * total);
    }
    if (between > best) {
      best = between;
      best_t = t;
    }
  }
  return best_t;
}

GrayImage binarize(const GrayImage& img, BinarizeMethod method) {
  if (img.empty()) throw Error(ErrorCode::dimension, "empty image");
  const int t = method.kind == BinarizeMethod::Kind::otsu ? otsu_threshold(img) : method.threshold;
  std::vector<std::uint8_t> out(img.pixels().size());
  std::transform(img.pixels().begin(), img.pixels().end(), out.begin(),
                 [t](std::uint8_t v) { return v <= t ? kInk : kBackground; });
  return GrayImage(img.width(), img.height(), std::move(out));
}

// ---------------------------------------------------------------------------

BlockSet split_blocks(const GrayImage& img, int n) {
  if (img.empty()) throw Error(ErrorCode::dimension, "empty image");
  if (n < 1) throw Error(ErrorCode::parameter, "block count must be >= 1");
  if (n > img.width())
    throw Error(ErrorCode::too_many_blocks,
                std::to_string(n) + " blocks requested for width " + std::to_string(img.width()));
  const int base = img.width() / n;
  const int extra = img.width() % n;

  BlockSet set;
  int right = img.width();
  for (int i = 0; i < n; ++i) {  // i = 0 is the rightmost strip
    const int w = base + (i < extra ? 1 : 0);
    right -= w;
    set.blocks.push_back(img.crop(right, 0, w, img.height()));
    set.x_offsets.push_back(right);
  }
  return set;
}

WindowSequence sliding_windows(const GrayImage& img, Axis axis, int window) {
  if (window <= 0) throw Error(ErrorCode::parameter, "window size must be positive");
  if (img.empty()) throw Error(ErrorCode::dimension, "empty image");

  WindowSequence seq;
  seq.axis = axis;
  seq.stride = window;
  if (axis == Axis::horizontal) {
    const int padded = (img.width() + window - 1) / window * window;
    const int pad = padded - img.width();
    GrayImage canvas(padded, img.height());
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) canvas.at(x + pad, y) = img.at(x, y);
    for (int right = padded; right > 0; right -= window)
      seq.windows.push_back(canvas.crop(right - window, 0, window, img.height()));
  } else {
    const int padded = (img.height() + window - 1) / window * window;
    GrayImage canvas(img.width(), padded);
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) canvas.at(x, y) = img.at(x, y);
    for (int top = 0; top < padded; top += window)
      seq.windows.push_back(canvas.crop(0, top, img.width(), window));
  }
  return seq;
}

// ---------------------------------------------------------------------------

GrayImage mirror_horizontal(const GrayImage& img) {
  GrayImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) out.at(img.width() - 1 - x, y) = img.at(x, y);
  return out;
}

GrayImage rotate_quarter(const GrayImage& img, int quarter_turns) {
  const int q = ((quarter_turns % 4) + 4) % 4;
  if (q == 0) return img;
  const int w = img.width(), h = img.height();
  GrayImage out = (q % 2 == 1) ? GrayImage(h, w) : GrayImage(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      switch (q) {
        case 1: out.at(y, w - 1 - x) = img.at(x, y); break;
        case 2: out.at(w - 1 - x, h - 1 - y) = img.at(x, y); break;
        case 3: out.at(h - 1 - y, x) = img.at(x, y); break;
      }
    }
  }
  return out;
}

GrayImage translate(const GrayImage& img, int dx, int dy) {
  GrayImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const int nx = x + dx, ny = y + dy;
      if (nx >= 0 && ny >= 0 && nx < img.width() && ny < img.height()) out.at(nx, ny) = img.at(x, y);
    }
  }
  return out;
}

GrayImage scale_nearest(const GrayImage& img, int factor) {
  if (factor < 1) throw Error(ErrorCode::parameter, "scale factor must be >= 1");
  GrayImage out(img.width() * factor, img.height() * factor);
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x) out.at(x, y) = img.at(x / factor, y / factor);
  return out;
}

GrayImage rotate(const GrayImage& img, double degrees) {
  const double a = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(a), s = std::sin(a);
  const double cx = (img.width() - 1) / 2.0, cy = (img.height() - 1) / 2.0;
  GrayImage out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const double dx = x - cx, dy = y - cy;
      const double sx = c * dx + s * dy + cx;
      const double sy = -s * dx + c * dy + cy;
      const int ix = static_cast<int>(std::lround(sx));
      const int iy = static_cast<int>(std::lround(sy));
      if (ix >= 0 && iy >= 0 && ix < img.width() && iy < img.height()) out.at(x, y) = img.at(ix, iy);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

const char* to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::validation: return "validation";
    case Split::test: return "test";
    case Split::unassigned: break;
  }
  return "-";
}

Split parse_split(const std::string& text) {
  if (text == "train") return Split::train;
  if (text == "validation") return Split::validation;
  if (text == "test") return Split::test;
  if (text == "-") return Split::unassigned;
  throw Error(ErrorCode::format, "unknown split '" + text + "'");
}

namespace {

struct Blob {
  double cx, cy, a, b, angle;
};

void paint_ellipse(GrayImage& img, const Blob& e, std::uint8_t value) {
  const double r = std::max(e.a, e.b) + 1.0;
  const int x0 = std::max(0, static_cast<int>(std::floor(e.cx - r)));
  const int x1 = std::min(img.width() - 1, static_cast<int>(std::ceil(e.cx + r)));
  const int y0 = std::max(0, static_cast<int>(std::floor(e.cy - r)));
  const int y1 = std::min(img.height() - 1, static_cast<int>(std::ceil(e.cy + r)));
  const double c = std::cos(e.angle), s = std::sin(e.angle);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const double dx = x - e.cx, dy = y - e.cy;
      const double u = (c * dx + s * dy) / e.a;
      const double v = (-s * dx + c * dy) / e.b;
      if (u * u + v * v <= 1.0) img.at(x, y) = value;
    }
  }
}

}  // namespace

std::vector<LabeledSample> generate_synthetic(int classes, int per_class, double separability,
                                              std::uint64_t seed, const SyntheticOptions& options) {
  if (classes < 2) throw Error(ErrorCode::parameter, "synthetic data needs at least 2 classes");
  if (per_class < 1) throw Error(ErrorCode::parameter, "per_class must be >= 1");
  if (separability < 0.0 || separability > 1.0)
    throw Error(ErrorCode::parameter, "separability must lie in [0, 1]");
  if (options.blocks < 1 || options.blocks > options.width)
    throw Error(ErrorCode::parameter, "invalid synthetic block count");

  const double region_w = static_cast<double>(options.width) / options.blocks;
  const double h = options.height;
  const double noise = 1.0 - separability;

  std::vector<LabeledSample> out;
  out.reserve(static_cast<std::size_t>(classes) * static_cast<std::size_t>(per_class));
  for (int c = 0; c < classes; ++c) {
    Rng layout_rng(derive_seed(seed, {1, static_cast<std::uint64_t>(c)}));
    std::vector<Blob> layout;
    for (int b = 0; b < options.blocks; ++b) {
      const double x0 = b * region_w;
      const int n_blobs = 2 + static_cast<int>(uniform_index(layout_rng, 3));
      for (int k = 0; k < n_blobs; ++k) {
        Blob e;
        e.cx = x0 + uniform(layout_rng, 0.2, 0.8) * region_w;
        e.cy = uniform(layout_rng, 0.25, 0.75) * h;
        e.a = uniform(layout_rng, 0.06, 0.3) * region_w;
        e.b = uniform(layout_rng, 0.06, 0.3) * h;
        e.angle = uniform(layout_rng, 0.0, std::numbers::pi);
        layout.push_back(e);
      }
    }

    for (int i = 0; i < per_class; ++i) {
      Rng rng(derive_seed(seed, {2, static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(i)}));
      GrayImage img(options.width, options.height, 220);
      for (const Blob& proto : layout) {
        Blob e = proto;
        e.cx += normal(rng) * 0.5 * region_w * noise;
        e.cy += normal(rng) * 0.5 * h * noise;
        const double scale = std::max(0.2, 1.0 + normal(rng) * 0.5 * noise);
        e.a = std::max(1.0, e.a * scale);
        e.b = std::max(1.0, e.b * scale);
        e.angle += normal(rng) * 0.5 * std::numbers::pi * noise;
        paint_ellipse(img, e, 40);
      }
      std::vector<std::uint8_t> px = img.pixels();
      for (auto& v : px) {
        const int jitter = static_cast<int>(uniform_index(rng, 31)) - 15;
        v = static_cast<std::uint8_t>(std::clamp(static_cast<int>(v) + jitter, 0, 255));
      }

      LabeledSample s;
      char name[64];
      std::snprintf(name, sizeof name, "c%02d/s%04d.png", c + 1, i);
      s.id = name;
      s.image = GrayImage(options.width, options.height, std::move(px));
      s.class_id = c;
      out.push_back(std::move(s));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
  std::string magic;
  in >> magic;
  if (magic != "P5" && magic != "P2") throw Error(ErrorCode::format, path.string() + ": not a PGM");

  auto next_int = [&]() {
    in >> std::ws;
    while (in.peek() == '#') {
      std::string skip;
      std::getline(in, skip);
      in >> std::ws;
    }
    int v = 0;
    if (!(in >> v)) throw Error(ErrorCode::format, path.string() + ": truncated PGM header");
    return v;
  };
  const int w = next_int(), h = next_int(), maxval = next_int();
  if (w <= 0 || h <= 0) throw Error(ErrorCode::dimension, path.string() + ": bad PGM size");
  if (maxval <= 0 || maxval > 255)
    throw Error(ErrorCode::format, path.string() + ": only 8-bit PGM is supported");

  std::vector<std::uint8_t> px(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  if (magic == "P5") {
    in.get();  // single whitespace after maxval
    in.read(reinterpret_cast<char*>(px.data()), static_cast<std::streamsize>(px.size()));
    if (in.gcount() != static_cast<std::streamsize>(px.size()))
      throw Error(ErrorCode::format, path.string() + ": truncated PGM data");
  } else {
    for (auto& v : px) v = static_cast<std::uint8_t>(next_int());
  }
  if (maxval != 255)
    for (auto& v : px) v = static_cast<std::uint8_t>(v * 255 / maxval);
  return GrayImage(w, h, std::move(px));
}

GrayImage read_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str()))
    throw Error(ErrorCode::io, path.string() + ": " + image.message);
  image.format = PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> px(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, px.data(), 0, nullptr)) {
    png_image_free(&image);
    throw Error(ErrorCode::format, path.string() + ": " + image.message);
  }
  return GrayImage(static_cast<int>(image.width), static_cast<int>(image.height), std::move(px));
}

}  // namespace

GrayImage read_image(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".png") return read_png(path);
  if (ext == ".pgm") return read_pgm(path);
  throw Error(ErrorCode::format, path.string() + ": unsupported image type (PNG or PGM expected)");
}

void write_pgm(const GrayImage& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels().data()),
            static_cast<std::streamsize>(img.pixels().size()));
}

void write_png(const GrayImage& img, const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, img.pixels().data(), 0, nullptr))
    throw Error(ErrorCode::io, path.string() + ": " + image.message);
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open manifest " + path.string());
  std::vector<ManifestEntry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string rel, cls, split;
    if (!std::getline(fields, rel, '\t') || !std::getline(fields, cls, '\t') ||
        !std::getline(fields, split, '\t'))
      throw Error(ErrorCode::format,
                  path.string() + ":" + std::to_string(line_no) + ": expected 3 tab-separated fields");
    ManifestEntry e;
    e.path = rel;
    try {
      e.class_id = std::stoi(cls) - 1;
    } catch (const std::exception&) {
      throw Error(ErrorCode::format, path.string() + ":" + std::to_string(line_no) + ": bad class id");
    }
    if (e.class_id < 0)
      throw Error(ErrorCode::format, path.string() + ":" + std::to_string(line_no) + ": class ids start at 1");
    e.split = parse_split(split);
    entries.push_back(std::move(e));
  }
  return entries;
}

void write_manifest(const std::vector<ManifestEntry>& entries, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write manifest " + path.string());
  for (const auto& e : entries) out << e.path << '\t' << e.class_id + 1 << '\t' << to_string(e.split) << '\n';
}

std::vector<LabeledSample> load_dataset(const std::filesystem::path& manifest) {
  const auto base = manifest.parent_path();
  std::vector<LabeledSample> out;
  for (const auto& e : read_manifest(manifest)) {
    LabeledSample s;
    s.id = e.path;
    s.image = read_image(base / e.path);
    s.class_id = e.class_id;
    s.split = e.split;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace hwr
