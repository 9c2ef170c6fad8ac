#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace hwr {

inline constexpr std::uint8_t kInk = 0;
inline constexpr std::uint8_t kBackground = 255;

/// Row-major 8-bit intensity grid. Dark pixels are ink.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, std::uint8_t fill = kBackground);
  GrayImage(int width, int height, std::vector<std::uint8_t> pixels);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return pixels_.empty(); }

  std::uint8_t at(int x, int y) const { return pixels_[index(x, y)]; }
  std::uint8_t& at(int x, int y) { return pixels_[index(x, y)]; }

  const std::vector<std::uint8_t>& pixels() const noexcept { return pixels_; }

  /// Copy of the rectangle [x0, x0+w) x [y0, y0+h).
  GrayImage crop(int x0, int y0, int w, int h) const;

  bool operator==(const GrayImage&) const = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// Ink test for binarized images.
inline bool is_ink(std::uint8_t v) noexcept { return v < 128; }

std::size_t ink_count(const GrayImage& img);

// ---------------------------------------------------------------------------
// Binarization

struct BinarizeMethod {
  enum class Kind { otsu, fixed } kind = Kind::otsu;
  int threshold = 128;  // used by Kind::fixed

  static BinarizeMethod otsu() { return {}; }
  static BinarizeMethod fixed(int t) { return {Kind::fixed, t}; }
};

/// Otsu threshold t: pixels <= t form the ink class. The lowest t maximizing
/// the between-class variance wins.
int otsu_threshold(const GrayImage& img);

/// Output pixels are kInk (value <= threshold) or kBackground.
GrayImage binarize(const GrayImage& img, BinarizeMethod method = BinarizeMethod::otsu());

// ---------------------------------------------------------------------------
// Decomposition

/// Vertical strips in right-to-left reading order. `x_offsets[i]` is the
/// leftmost source column of `blocks[i]`.
struct BlockSet {
  std::vector<GrayImage> blocks;
  std::vector<int> x_offsets;
};

/// n strips whose widths differ by at most one pixel; remainder pixels go to
/// the rightmost strips.
BlockSet split_blocks(const GrayImage& img, int n);

enum class Axis { horizontal, vertical };

struct WindowSequence {
  Axis axis = Axis::horizontal;
  int stride = 0;
  std::vector<GrayImage> windows;
};

/// Pads with background on the left (horizontal) or bottom (vertical) to a
/// multiple of `window`, then cuts full-height (resp. full-width) windows.
/// Horizontal windows run right to left, vertical ones top to bottom.
WindowSequence sliding_windows(const GrayImage& img, Axis axis, int window);

// ---------------------------------------------------------------------------
// Geometric transforms. These keep the canvas size unless stated.

GrayImage mirror_horizontal(const GrayImage& img);
/// Quarter turns counter-clockwise; swaps width and height for odd turns.
GrayImage rotate_quarter(const GrayImage& img, int quarter_turns);
/// Shift by (dx, dy); pixels pushed off the canvas are lost.
GrayImage translate(const GrayImage& img, int dx, int dy);
/// Nearest-neighbour upscale by an integer factor (canvas grows).
GrayImage scale_nearest(const GrayImage& img, int factor);
/// Rotation by `degrees` about the canvas centre, nearest-neighbour
/// resampling, background fill.
GrayImage rotate(const GrayImage& img, double degrees);

// ---------------------------------------------------------------------------
// Datasets

enum class Split { unassigned, train, validation, test };

const char* to_string(Split split);
Split parse_split(const std::string& text);

struct LabeledSample {
  std::string id;  // relative path in a manifest
  GrayImage image;
  int class_id = 0;  // zero-based; manifests store class_id + 1
  Split split = Split::unassigned;
};

struct SyntheticOptions {
  int width = 150;
  int height = 50;
  int blocks = 3;
};

/// Each class gets a fixed layout of 2-4 elliptical ink blobs per block
/// region; samples jitter position, scale and angle with Gaussian noise
/// proportional to (1 - separability). Deterministic in `seed`.
std::vector<LabeledSample> generate_synthetic(int classes, int per_class, double separability,
                                              std::uint64_t seed,
                                              const SyntheticOptions& options = {});

// ---------------------------------------------------------------------------
// File I/O

GrayImage read_image(const std::filesystem::path& path);
void write_pgm(const GrayImage& img, const std::filesystem::path& path);
void write_png(const GrayImage& img, const std::filesystem::path& path);

struct ManifestEntry {
  std::string path;
  int class_id = 0;  // zero-based
  Split split = Split::unassigned;
};

/// `<relative-path>\t<class-id>\t<split>` per line, class ids one-based.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::vector<ManifestEntry>& entries, const std::filesystem::path& path);

/// Loads every image named in a manifest, resolving paths against the
/// manifest's directory.
std::vector<LabeledSample> load_dataset(const std::filesystem::path& manifest);

}  // namespace hwr
