#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "raftmatch/image.hpp"
#include "raftmatch/rng.hpp"

namespace raftmatch {

struct Vec2 {
  double x = 0;
  double y = 0;
};

// Four corners ordered TL, TR, BR, BL. Positive signed area in image
// coordinates (y grows downward, so this winding is clockwise on screen).
struct Quad {
  std::array<Vec2, 4> pts;

  static Quad rect(double x0, double y0, double x1, double y1) {
    return Quad{{Vec2{x0, y0}, Vec2{x1, y0}, Vec2{x1, y1}, Vec2{x0, y1}}};
  }
  double signed_area() const;
  bool is_convex_positive() const;
};

// 3x3 projective transform, row-major; normalized so m[8] == 1 when the
// bottom-right entry is nonzero.
struct Homography {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Homography identity() { return Homography{}; }
  Vec2 apply(const Vec2& p) const;
  Homography compose(const Homography& rhs) const;  // this ∘ rhs
  Homography inverse() const;
  Homography normalized() const;
  double det() const;
};

// Four-point DLT with Hartley normalization of both point sets.
// Throws DegenerateQuad when any three corners of either quad are collinear
// or the solution is singular.
Homography estimate_homography(const Quad& src, const Quad& dst);

// Inverse-maps each output pixel center through h (which takes source image
// coordinates to the [0,out_px]^2 target square) and samples the source with
// bilinear interpolation, clamping at the edges.
Image warp_cell(const Image& img, const Homography& h, int out_px);

// (rows x cols) lattice of pixel positions, row-major
struct VertexGrid {
  int rows = 0;
  int cols = 0;
  std::vector<Vec2> pts;

  const Vec2& at(int r, int c) const { return pts[static_cast<size_t>(r) * cols + c]; }
  Vec2& at(int r, int c) { return pts[static_cast<size_t>(r) * cols + c]; }
};

// Uniform grid of square cell images cut out of one raft observation.
struct NormalizedRaft {
  uint64_t raft_id = 0;
  int grid_h = 0;
  int grid_w = 0;
  int cell_px = 0;
  std::vector<Image> cells;  // row-major, grid_h * grid_w

  const Image& cell(int cx, int cy) const {
    return cells[static_cast<size_t>(cy) * grid_w + cx];
  }
  Image assemble() const;  // cells tiled into one image
};

// Per-cell homography from the vertex quad to the cell square. Vertex grid
// must be (grid_h+1) x (grid_w+1). Degenerate or inverted cells raise
// AlignmentFailure with the offending cell index.
NormalizedRaft normalize_raft(const Image& img, const VertexGrid& vertices,
                              int cell_px, uint64_t raft_id);

struct PatchLoc {
  int cell_x = 0;
  int cell_y = 0;
  int off_x = 0;  // pixel offset inside the cell
  int off_y = 0;
};

struct PatchSet {
  uint64_t raft_id = 0;
  int patch_px = 0;
  std::vector<PatchLoc> locs;
  std::vector<Image> patches;
};

// Draws `count` locations over distinct cells (uniform, without replacement)
// with a uniform integer sub-offset. Throws InsufficientCells when count
// exceeds the number of cells or the patch does not fit.
std::vector<PatchLoc> draw_patch_locations(int grid_h, int grid_w, int cell_px,
                                           int patch_px, int count, Rng& rng);

// Cuts the patches named by `locs` out of a normalized raft. The same
// location list must be reused for both members of a comparison pair.
PatchSet extract_patches(const NormalizedRaft& raft,
                         const std::vector<PatchLoc>& locs, int patch_px);

PatchSet sample_patches(const NormalizedRaft& raft, int count, int patch_px,
                        Rng& rng);

}  // namespace raftmatch
