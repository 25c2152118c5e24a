#include "raftmatch/geometry.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "raftmatch/errors.hpp"

namespace raftmatch {

double Quad::signed_area() const {
  double a = 0.0;
  for (int i = 0; i < 4; ++i) {
    const Vec2& p = pts[i];
    const Vec2& q = pts[(i + 1) % 4];
    a += p.x * q.y - q.x * p.y;
  }
  return 0.5 * a;
}

bool Quad::is_convex_positive() const {
  // every consecutive corner triple must turn the same (positive) way
  for (int i = 0; i < 4; ++i) {
    const Vec2& a = pts[i];
    const Vec2& b = pts[(i + 1) % 4];
    const Vec2& c = pts[(i + 2) % 4];
    double cross = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    if (cross <= 0.0) return false;
  }
  return true;
}

Vec2 Homography::apply(const Vec2& p) const {
  double w = m[6] * p.x + m[7] * p.y + m[8];
  return Vec2{(m[0] * p.x + m[1] * p.y + m[2]) / w,
              (m[3] * p.x + m[4] * p.y + m[5]) / w};
}

Homography Homography::compose(const Homography& rhs) const {
  Homography out;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += m[r * 3 + k] * rhs.m[k * 3 + c];
      out.m[r * 3 + c] = s;
    }
  return out.normalized();
}

double Homography::det() const {
  return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
         m[2] * (m[3] * m[7] - m[4] * m[6]);
}

Homography Homography::inverse() const {
  double d = det();
  if (std::abs(d) < 1e-14) throw DegenerateQuad("homography not invertible");
  Homography out;
  out.m[0] = (m[4] * m[8] - m[5] * m[7]) / d;
  out.m[1] = (m[2] * m[7] - m[1] * m[8]) / d;
  out.m[2] = (m[1] * m[5] - m[2] * m[4]) / d;
  out.m[3] = (m[5] * m[6] - m[3] * m[8]) / d;
  out.m[4] = (m[0] * m[8] - m[2] * m[6]) / d;
  out.m[5] = (m[2] * m[3] - m[0] * m[5]) / d;
  out.m[6] = (m[3] * m[7] - m[4] * m[6]) / d;
  out.m[7] = (m[1] * m[6] - m[0] * m[7]) / d;
  out.m[8] = (m[0] * m[4] - m[1] * m[3]) / d;
  return out.normalized();
}

Homography Homography::normalized() const {
  Homography out = *this;
  if (std::abs(out.m[8]) > 1e-12) {
    double s = out.m[8];
    for (double& v : out.m) v /= s;
  }
  return out;
}

namespace {

struct Conditioner {
  double cx, cy, scale;  // p' = scale * (p - c)
};

Conditioner condition(const Quad& q) {
  double cx = 0, cy = 0;
  for (const Vec2& p : q.pts) {
    cx += p.x;
    cy += p.y;
  }
  cx /= 4;
  cy /= 4;
  double mean_dist = 0;
  for (const Vec2& p : q.pts)
    mean_dist += std::hypot(p.x - cx, p.y - cy);
  mean_dist /= 4;
  double scale = mean_dist > 1e-12 ? std::sqrt(2.0) / mean_dist : 1.0;
  return {cx, cy, scale};
}

void check_not_collinear(const Quad& q, const char* which) {
  // degenerate if any three corners are (nearly) collinear
  double span = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      span = std::max(span, std::hypot(q.pts[i].x - q.pts[j].x, q.pts[i].y - q.pts[j].y));
  double tol = 1e-9 * std::max(span * span, 1e-12);
  for (int i = 0; i < 4; ++i) {
    const Vec2& a = q.pts[i];
    const Vec2& b = q.pts[(i + 1) % 4];
    const Vec2& c = q.pts[(i + 2) % 4];
    double cross = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    if (std::abs(cross) <= tol)
      throw DegenerateQuad(std::string("collinear corners in ") + which + " quad");
  }
}

}  // namespace

Homography estimate_homography(const Quad& src, const Quad& dst) {
  check_not_collinear(src, "source");
  check_not_collinear(dst, "target");

  Conditioner ts = condition(src);
  Conditioner td = condition(dst);

  Eigen::Matrix<double, 8, 9> A;
  for (int i = 0; i < 4; ++i) {
    double x = (src.pts[i].x - ts.cx) * ts.scale;
    double y = (src.pts[i].y - ts.cy) * ts.scale;
    double u = (dst.pts[i].x - td.cx) * td.scale;
    double v = (dst.pts[i].y - td.cy) * td.scale;
    A.row(2 * i) << -x, -y, -1, 0, 0, 0, x * u, y * u, u;
    A.row(2 * i + 1) << 0, 0, 0, -x, -y, -1, x * v, y * v, v;
  }
  Eigen::JacobiSVD<Eigen::Matrix<double, 8, 9>> svd(A, Eigen::ComputeFullV);
  Eigen::Matrix<double, 9, 1> h = svd.matrixV().col(8);

  Homography hn;
  for (int i = 0; i < 9; ++i) hn.m[i] = h(i);

  // undo conditioning: H = Td^-1 * Hn * Ts
  Homography Ts{{ts.scale, 0, -ts.scale * ts.cx, 0, ts.scale, -ts.scale * ts.cy, 0, 0, 1}};
  Homography TdInv{{1.0 / td.scale, 0, td.cx, 0, 1.0 / td.scale, td.cy, 0, 0, 1}};
  Homography H = TdInv.compose(hn.compose(Ts));

  if (std::abs(H.det()) < 1e-12) throw DegenerateQuad("singular homography");
  return H.normalized();
}

Image warp_cell(const Image& img, const Homography& h, int out_px) {
  Homography inv = h.inverse();
  Image out(out_px, out_px);
  for (int y = 0; y < out_px; ++y) {
    for (int x = 0; x < out_px; ++x) {
      Vec2 p = inv.apply(Vec2{x + 0.5, y + 0.5});
      out.at(x, y) = static_cast<float>(img.sample_bilinear(p.x, p.y));
    }
  }
  return out;
}

Image NormalizedRaft::assemble() const {
  Image out(grid_w * cell_px, grid_h * cell_px);
  for (int cy = 0; cy < grid_h; ++cy)
    for (int cx = 0; cx < grid_w; ++cx) {
      const Image& c = cell(cx, cy);
      for (int y = 0; y < cell_px; ++y)
        for (int x = 0; x < cell_px; ++x)
          out.at(cx * cell_px + x, cy * cell_px + y) = c.at(x, y);
    }
  return out;
}

NormalizedRaft normalize_raft(const Image& img, const VertexGrid& vertices,
                              int cell_px, uint64_t raft_id) {
  int grid_h = vertices.rows - 1;
  int grid_w = vertices.cols - 1;
  if (grid_h < 1 || grid_w < 1)
    throw AlignmentFailure("vertex grid too small", 0, 0);

  NormalizedRaft out;
  out.raft_id = raft_id;
  out.grid_h = grid_h;
  out.grid_w = grid_w;
  out.cell_px = cell_px;
  out.cells.reserve(static_cast<size_t>(grid_h) * grid_w);

  Quad target = Quad::rect(0, 0, cell_px, cell_px);
  for (int cy = 0; cy < grid_h; ++cy) {
    for (int cx = 0; cx < grid_w; ++cx) {
      Quad q{{vertices.at(cy, cx), vertices.at(cy, cx + 1),
              vertices.at(cy + 1, cx + 1), vertices.at(cy + 1, cx)}};
      if (q.signed_area() <= 0.0 || !q.is_convex_positive())
        throw AlignmentFailure("inverted or non-convex cell quad", cx, cy);
      try {
        Homography h = estimate_homography(q, target);
        out.cells.push_back(warp_cell(img, h, cell_px));
      } catch (const DegenerateQuad& e) {
        throw AlignmentFailure(e.what(), cx, cy);
      }
    }
  }
  return out;
}

std::vector<PatchLoc> draw_patch_locations(int grid_h, int grid_w, int cell_px,
                                           int patch_px, int count, Rng& rng) {
  if (patch_px > cell_px)
    throw InsufficientCells("patch does not fit inside a cell");
  int n_cells = grid_h * grid_w;
  if (count < 1 || count > n_cells)
    throw InsufficientCells("requested " + std::to_string(count) + " patches from " +
                            std::to_string(n_cells) + " cells");
  std::vector<int> cells = rng.sample_without_replacement(n_cells, count);
  int max_off = cell_px - patch_px;
  std::vector<PatchLoc> locs;
  locs.reserve(count);
  for (int c : cells) {
    PatchLoc loc;
    loc.cell_x = c % grid_w;
    loc.cell_y = c / grid_w;
    loc.off_x = max_off > 0 ? rng.uniform_int(0, max_off) : 0;
    loc.off_y = max_off > 0 ? rng.uniform_int(0, max_off) : 0;
    locs.push_back(loc);
  }
  return locs;
}

PatchSet extract_patches(const NormalizedRaft& raft,
                         const std::vector<PatchLoc>& locs, int patch_px) {
  if (patch_px > raft.cell_px)
    throw InsufficientCells("patch does not fit inside a cell");
  PatchSet ps;
  ps.raft_id = raft.raft_id;
  ps.patch_px = patch_px;
  ps.locs = locs;
  ps.patches.reserve(locs.size());
  for (const PatchLoc& loc : locs) {
    const Image& cell = raft.cell(loc.cell_x, loc.cell_y);
    Image p(patch_px, patch_px);
    for (int y = 0; y < patch_px; ++y)
      for (int x = 0; x < patch_px; ++x)
        p.at(x, y) = cell.at(loc.off_x + x, loc.off_y + y);
    ps.patches.push_back(std::move(p));
  }
  return ps;
}

PatchSet sample_patches(const NormalizedRaft& raft, int count, int patch_px,
                        Rng& rng) {
  auto locs = draw_patch_locations(raft.grid_h, raft.grid_w, raft.cell_px,
                                   patch_px, count, rng);
  return extract_patches(raft, locs, patch_px);
}

}  // namespace raftmatch
