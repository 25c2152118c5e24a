#include "raftmatch/synthfarm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "raftmatch/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace raftmatch {

void FarmConfig::validate() const {
  if (n_seed_rafts < 1 || n_grow_robots < 1 || rafts_per_robot < 1)
    throw ConfigError("counts must be >= 1");
  if (grid_h < 1 || grid_w < 1) throw ConfigError("grid dims must be >= 1");
  if (cell_px < 8) throw ConfigError("cell_px must be >= 8");
  if (seed_px_per_cell < 8) throw ConfigError("seed_px_per_cell must be >= 8");
  if (growth_steps < 0) throw ConfigError("growth_steps must be >= 0");
  if (n_train_pairs < 0 || n_train_pairs > n_seed_rafts)
    throw ConfigError("n_train_pairs out of range");
  int total = total_grow_rafts();
  if (total < 1 || total > n_grow_robots * rafts_per_robot)
    throw ConfigError("n_grow_rafts_total exceeds robot capacity");
  if (n_seed_rafts > total)
    throw ConfigError("more seeding rafts than growing slots");
  if (noise.res_scale <= 0 || noise.res_scale > 1)
    throw ConfigError("res_scale must be in (0,1]");
  if (noise.illum_gain_min > noise.illum_gain_max)
    throw ConfigError("illumination gain range inverted");
}

double germination_probability(const GrowthModelParams& params,
                               double dist_from_hole) {
  double p = params.germ_prob_center - params.germ_prob_slope * dist_from_hole;
  return std::clamp(p, params.germ_prob_floor, 1.0);
}

namespace {

int poisson(Rng& rng, double lambda) {
  double L = std::exp(-lambda);
  double p = 1.0;
  int k = 0;
  do {
    ++k;
    p *= rng.uniform();
  } while (p > L);
  return k - 1;
}

CellSpec gen_cell(Rng& rng, const GrowthModelParams& gp) {
  CellSpec c;
  c.texture_seed = rng.next_u64();
  c.hole_x = std::clamp(0.5 + rng.normal(0.0, 0.03), 0.40, 0.60);
  c.hole_y = std::clamp(0.5 + rng.normal(0.0, 0.03), 0.40, 0.60);
  int n = std::min(poisson(rng, gp.seeds_per_cell_mean), 6);
  c.seeds.reserve(n);
  for (int i = 0; i < n; ++i) {
    SeedSpec s;
    if (rng.uniform() < gp.cluster_frac) {
      s.x = std::clamp(c.hole_x + rng.normal(0.0, gp.cluster_sigma), 0.06, 0.94);
      s.y = std::clamp(c.hole_y + rng.normal(0.0, gp.cluster_sigma), 0.06, 0.94);
    } else {
      s.x = rng.uniform(0.06, 0.94);
      s.y = rng.uniform(0.06, 0.94);
    }
    double d = std::hypot(s.x - c.hole_x, s.y - c.hole_y);
    s.germinated = rng.uniform() < germination_probability(gp, d);
    s.germ_time = rng.uniform(0.5, gp.germ_time_max);
    s.growth_scale = rng.uniform(0.6, 1.0);
    c.seeds.push_back(s);
  }
  return c;
}

}  // namespace

FarmDataset gen_farm(const FarmConfig& config) {
  config.validate();
  FarmDataset ds;
  ds.config = config;

  int total = config.total_grow_rafts();
  Rng rng(derive_seed(config.rng_seed, "gen_farm"));

  ds.rafts.reserve(total);
  for (int r = 0; r < total; ++r) {
    RaftSpec raft;
    raft.raft_id = static_cast<uint64_t>(r);
    raft.grid_h = config.grid_h;
    raft.grid_w = config.grid_w;
    raft.cells.reserve(static_cast<size_t>(config.grid_h) * config.grid_w);
    for (int i = 0; i < config.grid_h * config.grid_w; ++i)
      raft.cells.push_back(gen_cell(rng, config.growth));
    ds.rafts.push_back(std::move(raft));
  }

  // balanced slot counts across robots, capped by frame capacity
  int base = total / config.n_grow_robots;
  int rem = total % config.n_grow_robots;
  std::vector<GrowPlacement> slots;
  slots.reserve(total);
  ds.robot_rafts.assign(config.n_grow_robots, {});
  for (int j = 0; j < config.n_grow_robots; ++j) {
    int count = base + (j < rem ? 1 : 0);
    ds.robot_rafts[j].assign(count, 0);
    for (int q = 0; q < count; ++q) slots.push_back(GrowPlacement{j, q});
  }

  // the untracked germination-period shuffle: a uniform random bijection
  // from rafts onto slots
  Rng shuffle_rng(derive_seed(config.rng_seed, "shuffle"));
  shuffle_rng.shuffle(slots);
  ds.placement.assign(total, GrowPlacement{});
  for (int r = 0; r < total; ++r) {
    ds.placement[r] = slots[r];
    ds.robot_rafts[slots[r].robot][slots[r].slot] = static_cast<uint64_t>(r);
  }

  ds.seeding_ids.resize(config.n_seed_rafts);
  for (int i = 0; i < config.n_seed_rafts; ++i) ds.seeding_ids[i] = i;
  std::vector<uint64_t> split = ds.seeding_ids;
  Rng split_rng(derive_seed(config.rng_seed, "split"));
  split_rng.shuffle(split);
  ds.train_ids.assign(split.begin(), split.begin() + config.n_train_pairs);
  ds.query_ids.assign(split.begin() + config.n_train_pairs, split.end());
  return ds;
}

RaftSpec apply_growth(const RaftSpec& raft, double t,
                      const GrowthModelParams& params) {
  if (t < raft.growth_t)
    throw Error("apply_growth: time must not run backwards");
  RaftSpec out = raft;
  out.growth_t = t;
  for (CellSpec& c : out.cells) {
    for (SeedSpec& s : c.seeds) {
      if (!s.germinated || t <= s.germ_time) {
        s.radius = 0.0;
        continue;
      }
      double age = t - s.germ_time;
      s.radius = s.growth_scale * params.plant_radius_max *
                 (1.0 - std::exp(-params.growth_rate * age));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// texture

namespace {

double fade(double t) { return t * t * t * (t * (t * 6 - 15) + 10); }

double lattice(uint64_t seed, uint64_t oct, int ix, int iy) {
  uint64_t cell = (static_cast<uint64_t>(static_cast<uint32_t>(ix)) << 32) |
                  static_cast<uint32_t>(iy);
  uint64_t h = hash_combine(hash_combine(seed, oct), cell);
  return static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

// two-octave value noise in [-1,1]; highest frequency is 4 cycles per cell,
// which survives the growing camera's downscale
double value_noise(uint64_t seed, double u, double v) {
  static constexpr int kFreq[2] = {2, 4};
  static constexpr double kAmp[2] = {0.65, 0.35};
  double sum = 0.0;
  for (int o = 0; o < 2; ++o) {
    double fu = u * kFreq[o];
    double fv = v * kFreq[o];
    int i0 = static_cast<int>(std::floor(fu));
    int j0 = static_cast<int>(std::floor(fv));
    double tx = fade(fu - i0);
    double ty = fade(fv - j0);
    double v00 = lattice(seed, o, i0, j0);
    double v10 = lattice(seed, o, i0 + 1, j0);
    double v01 = lattice(seed, o, i0, j0 + 1);
    double v11 = lattice(seed, o, i0 + 1, j0 + 1);
    double top = v00 + (v10 - v00) * tx;
    double bot = v01 + (v11 - v01) * tx;
    sum += kAmp[o] * (top + (bot - top) * ty);
  }
  return sum;
}

double smoothstep(double e0, double e1, double x) {
  double t = std::clamp((x - e0) / (e1 - e0), 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

double cell_intensity(const CellSpec& c, double u, double v, double growth_t,
                      const GrowthModelParams& gp) {
  double base = 0.45 + 0.22 * value_noise(c.texture_seed, u, v);
  if (growth_t > 0) base *= gp.wet_darken;

  // recessed hole
  double hd = std::hypot(u - c.hole_x, v - c.hole_y);
  double hole = 1.0 - smoothstep(0.15, 0.21, hd);
  base *= 1.0 - 0.5 * hole;

  // pale seeds, visible only right after seeding
  if (growth_t <= 0.0) {
    for (const SeedSpec& s : c.seeds) {
      double sd = std::hypot(u - s.x, v - s.y);
      double dot = 1.0 - smoothstep(0.035, 0.055, sd);
      if (dot > 0) base += (0.92 - base) * dot;
    }
  }

  // cell walls: the strong but ambiguous grid feature
  double bd = std::min(std::min(u, v), std::min(1.0 - u, 1.0 - v));
  double wall = 1.0 - smoothstep(0.030, 0.055, bd);
  if (wall > 0) base += (0.07 - base) * wall;

  // plants occlude everything below
  for (const SeedSpec& s : c.seeds) {
    if (s.radius <= 0) continue;
    double pd = std::hypot(u - s.x, v - s.y);
    double disc = 1.0 - smoothstep(s.radius * 0.75, s.radius, pd);
    if (disc > 0) {
      double leaf =
          0.80 + 0.12 * value_noise(c.texture_seed ^ 0x51ed2701u, u * 6.0, v * 6.0);
      base += (leaf - base) * disc;
    }
  }
  return std::clamp(base, 0.0, 1.0);
}

}  // namespace

double eval_raft_intensity(const RaftSpec& raft, double U, double V,
                           const GrowthModelParams& params) {
  int cx = std::clamp(static_cast<int>(std::floor(U)), 0, raft.grid_w - 1);
  int cy = std::clamp(static_cast<int>(std::floor(V)), 0, raft.grid_h - 1);
  return cell_intensity(raft.cell(cx, cy), U - cx, V - cy, raft.growth_t, params);
}

// ---------------------------------------------------------------------------
// rendering

namespace {

constexpr double kBackground = 0.10;

Homography make_placement(int grid_w, int grid_h, double ppc, double ox,
                          double oy, double jitter_px, Rng& rng) {
  Quad raft_rect = Quad::rect(0, 0, grid_w, grid_h);
  Quad px;
  px.pts[0] = Vec2{ox, oy};
  px.pts[1] = Vec2{ox + grid_w * ppc, oy};
  px.pts[2] = Vec2{ox + grid_w * ppc, oy + grid_h * ppc};
  px.pts[3] = Vec2{ox, oy + grid_h * ppc};
  for (Vec2& p : px.pts) {
    p.x += rng.normal(0.0, jitter_px);
    p.y += rng.normal(0.0, jitter_px);
  }
  return estimate_homography(raft_rect, px);
}

void paint_raft(Image& frame, const RaftSpec& raft, const Homography& place,
                const GrowthModelParams& gp) {
  Homography inv = place.inverse();
  // pixel bounding box of the placed raft
  double minx = 1e18, miny = 1e18, maxx = -1e18, maxy = -1e18;
  for (int r = 0; r <= 1; ++r)
    for (int c = 0; c <= 1; ++c) {
      Vec2 p = place.apply(Vec2{c * double(raft.grid_w), r * double(raft.grid_h)});
      minx = std::min(minx, p.x);
      miny = std::min(miny, p.y);
      maxx = std::max(maxx, p.x);
      maxy = std::max(maxy, p.y);
    }
  int x0 = std::max(0, static_cast<int>(std::floor(minx)) - 1);
  int y0 = std::max(0, static_cast<int>(std::floor(miny)) - 1);
  int x1 = std::min(frame.width - 1, static_cast<int>(std::ceil(maxx)) + 1);
  int y1 = std::min(frame.height - 1, static_cast<int>(std::ceil(maxy)) + 1);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      Vec2 p = inv.apply(Vec2{x + 0.5, y + 0.5});
      if (p.x < 0 || p.x > raft.grid_w || p.y < 0 || p.y > raft.grid_h) continue;
      frame.at(x, y) =
          static_cast<float>(eval_raft_intensity(raft, p.x, p.y, gp));
    }
  }
}

void paint_background(Image& frame, uint64_t key) {
  for (int y = 0; y < frame.height; ++y)
    for (int x = 0; x < frame.width; ++x) {
      uint64_t h = hash_combine(key, (static_cast<uint64_t>(x) << 32) | uint32_t(y));
      frame.at(x, y) =
          static_cast<float>(kBackground + 0.03 * ((h >> 11) * 0x1.0p-53));
    }
}

VertexGrid placement_vertices(const Homography& place, int grid_w, int grid_h) {
  VertexGrid g;
  g.rows = grid_h + 1;
  g.cols = grid_w + 1;
  g.pts.resize(static_cast<size_t>(g.rows) * g.cols);
  for (int r = 0; r <= grid_h; ++r)
    for (int c = 0; c <= grid_w; ++c)
      g.at(r, c) = place.apply(Vec2{double(c), double(r)});
  return g;
}

void apply_gain(Image& frame, double gain) {
  for (float& v : frame.px)
    v = static_cast<float>(std::clamp(double(v) * gain, 0.0, 1.0));
}

}  // namespace

VertexGrid jitter_vertices(const VertexGrid& vertices, double sigma_px, Rng& rng) {
  VertexGrid out = vertices;
  for (Vec2& p : out.pts) {
    p.x += rng.normal(0.0, sigma_px);
    p.y += rng.normal(0.0, sigma_px);
  }
  return out;
}

RenderedFrame render_seeding(const RaftSpec& raft, const FarmConfig& cfg) {
  double ppc = cfg.seed_px_per_cell;
  double margin = 0.8 * ppc;
  int w = static_cast<int>(std::ceil(raft.grid_w * ppc + 2 * margin));
  int h = static_cast<int>(std::ceil(raft.grid_h * ppc + 2 * margin));

  Rng rng(derive_seed(cfg.rng_seed, "seedcam", raft.raft_id));
  double jitter = cfg.noise.placement_jitter * std::min(raft.grid_w, raft.grid_h) * ppc;
  Homography place = make_placement(raft.grid_w, raft.grid_h, ppc, margin, margin,
                                    jitter, rng);

  RenderedFrame fr;
  fr.name = "seed_" + std::to_string(raft.raft_id);
  fr.image = Image(w, h);
  paint_background(fr.image, derive_seed(cfg.rng_seed, "seedbg", raft.raft_id));
  paint_raft(fr.image, raft, place, cfg.growth);
  fr.illum_gain = 1.0;

  FrameObs obs;
  obs.raft_id = raft.raft_id;
  obs.true_vertices = placement_vertices(place, raft.grid_w, raft.grid_h);
  Rng vr(derive_seed(cfg.rng_seed, "vnoise", raft.raft_id,
                     static_cast<uint64_t>(std::llround(raft.growth_t))));
  obs.det_vertices = jitter_vertices(obs.true_vertices, cfg.noise.vertex_sigma_px, vr);
  fr.obs.push_back(std::move(obs));
  return fr;
}

RenderedFrame render_growing(const std::vector<RaftSpec>& rafts, int robot_id,
                             const FarmConfig& cfg) {
  double ppc = cfg.seed_px_per_cell * cfg.noise.res_scale;
  double margin = 0.8 * ppc;
  double gap = 1.4 * ppc;
  int gw = cfg.grid_w, gh = cfg.grid_h;
  int n = static_cast<int>(rafts.size());
  int w = static_cast<int>(std::ceil(2 * margin + n * gw * ppc + std::max(0, n - 1) * gap));
  int h = static_cast<int>(std::ceil(gh * ppc + 2 * margin));

  // the bench does not move between captures: placement and lighting are
  // keyed by robot only, detector noise by (raft, t)
  Rng rng(derive_seed(cfg.rng_seed, "growcam", static_cast<uint64_t>(robot_id)));
  double gain = rng.uniform(cfg.noise.illum_gain_min, cfg.noise.illum_gain_max);
  double jitter = cfg.noise.placement_jitter * std::min(gw, gh) * ppc;

  RenderedFrame fr;
  fr.name = "grow_r" + std::to_string(robot_id);
  fr.image = Image(std::max(w, 1), std::max(h, 1));
  paint_background(fr.image, derive_seed(cfg.rng_seed, "growbg", robot_id));

  double sigma = cfg.noise.vertex_sigma_px * cfg.noise.res_scale;
  for (int q = 0; q < n; ++q) {
    double ox = margin + q * (gw * ppc + gap);
    Homography place = make_placement(gw, gh, ppc, ox, margin, jitter, rng);
    paint_raft(fr.image, rafts[q], place, cfg.growth);

    FrameObs obs;
    obs.raft_id = rafts[q].raft_id;
    obs.robot = robot_id;
    obs.slot = q;
    obs.true_vertices = placement_vertices(place, gw, gh);
    Rng vr(derive_seed(cfg.rng_seed, "vnoise", rafts[q].raft_id,
                       static_cast<uint64_t>(std::llround(rafts[q].growth_t))));
    obs.det_vertices = jitter_vertices(obs.true_vertices, sigma, vr);
    fr.obs.push_back(std::move(obs));
  }
  apply_gain(fr.image, gain);
  fr.illum_gain = gain;
  return fr;
}

RenderedDataset render_farm(const FarmDataset& farm) {
  RenderedDataset out;
  out.farm = farm;
  out.seed_frames.reserve(farm.seeding_ids.size());
  for (uint64_t id : farm.seeding_ids)
    out.seed_frames.push_back(render_seeding(farm.rafts[id], farm.config));

  out.grow_frames.reserve(farm.robot_rafts.size());
  for (size_t j = 0; j < farm.robot_rafts.size(); ++j) {
    std::vector<RaftSpec> grown;
    grown.reserve(farm.robot_rafts[j].size());
    for (uint64_t id : farm.robot_rafts[j])
      grown.push_back(apply_growth(farm.rafts[id], farm.config.growth_steps,
                                   farm.config.growth));
    out.grow_frames.push_back(render_growing(grown, static_cast<int>(j), farm.config));
  }
  return out;
}

std::vector<RenderedFrame> render_growth_series(const FarmDataset& farm,
                                                int robot) {
  std::vector<RenderedFrame> frames;
  frames.reserve(farm.config.growth_steps + 1);
  for (int t = 0; t <= farm.config.growth_steps; ++t) {
    std::vector<RaftSpec> grown;
    grown.reserve(farm.robot_rafts[robot].size());
    for (uint64_t id : farm.robot_rafts[robot])
      grown.push_back(apply_growth(farm.rafts[id], t, farm.config.growth));
    RenderedFrame fr = render_growing(grown, robot, farm.config);
    fr.name += "_t" + std::to_string(t);
    frames.push_back(std::move(fr));
  }
  return frames;
}

// ---------------------------------------------------------------------------
// dataset directory

namespace {

json config_to_json(const FarmConfig& c) {
  return json{{"n_seed_rafts", c.n_seed_rafts},
              {"n_train_pairs", c.n_train_pairs},
              {"n_grow_robots", c.n_grow_robots},
              {"rafts_per_robot", c.rafts_per_robot},
              {"n_grow_rafts_total", c.n_grow_rafts_total},
              {"grid_h", c.grid_h},
              {"grid_w", c.grid_w},
              {"cell_px", c.cell_px},
              {"seed_px_per_cell", c.seed_px_per_cell},
              {"growth_steps", c.growth_steps},
              {"rng_seed", c.rng_seed},
              {"noise",
               {{"vertex_sigma_px", c.noise.vertex_sigma_px},
                {"illum_gain_min", c.noise.illum_gain_min},
                {"illum_gain_max", c.noise.illum_gain_max},
                {"res_scale", c.noise.res_scale},
                {"placement_jitter", c.noise.placement_jitter}}},
              {"growth",
               {{"germ_prob_center", c.growth.germ_prob_center},
                {"germ_prob_slope", c.growth.germ_prob_slope},
                {"germ_prob_floor", c.growth.germ_prob_floor},
                {"seeds_per_cell_mean", c.growth.seeds_per_cell_mean},
                {"cluster_frac", c.growth.cluster_frac},
                {"cluster_sigma", c.growth.cluster_sigma},
                {"plant_radius_max", c.growth.plant_radius_max},
                {"growth_rate", c.growth.growth_rate},
                {"germ_time_max", c.growth.germ_time_max},
                {"wet_darken", c.growth.wet_darken}}}};
}

FarmConfig config_from_json(const json& j) {
  FarmConfig c;
  c.n_seed_rafts = j.at("n_seed_rafts");
  c.n_train_pairs = j.at("n_train_pairs");
  c.n_grow_robots = j.at("n_grow_robots");
  c.rafts_per_robot = j.at("rafts_per_robot");
  c.n_grow_rafts_total = j.at("n_grow_rafts_total");
  c.grid_h = j.at("grid_h");
  c.grid_w = j.at("grid_w");
  c.cell_px = j.at("cell_px");
  c.seed_px_per_cell = j.at("seed_px_per_cell");
  c.growth_steps = j.at("growth_steps");
  c.rng_seed = j.at("rng_seed");
  const json& n = j.at("noise");
  c.noise.vertex_sigma_px = n.at("vertex_sigma_px");
  c.noise.illum_gain_min = n.at("illum_gain_min");
  c.noise.illum_gain_max = n.at("illum_gain_max");
  c.noise.res_scale = n.at("res_scale");
  c.noise.placement_jitter = n.at("placement_jitter");
  const json& g = j.at("growth");
  c.growth.germ_prob_center = g.at("germ_prob_center");
  c.growth.germ_prob_slope = g.at("germ_prob_slope");
  c.growth.germ_prob_floor = g.at("germ_prob_floor");
  c.growth.seeds_per_cell_mean = g.at("seeds_per_cell_mean");
  c.growth.cluster_frac = g.at("cluster_frac");
  c.growth.cluster_sigma = g.at("cluster_sigma");
  c.growth.plant_radius_max = g.at("plant_radius_max");
  c.growth.growth_rate = g.at("growth_rate");
  c.growth.germ_time_max = g.at("germ_time_max");
  c.growth.wet_darken = g.at("wet_darken");
  return c;
}

void write_vertex_rows(std::FILE* f, const std::string& frame,
                       const FrameObs& obs) {
  for (int r = 0; r < obs.true_vertices.rows; ++r)
    for (int c = 0; c < obs.true_vertices.cols; ++c) {
      const Vec2& t = obs.true_vertices.at(r, c);
      const Vec2& d = obs.det_vertices.at(r, c);
      std::fprintf(f, "%s,%llu,%d,%d,%d,%d,%.6f,%.6f,%.6f,%.6f\n", frame.c_str(),
                   static_cast<unsigned long long>(obs.raft_id), obs.robot,
                   obs.slot, r, c, t.x, t.y, d.x, d.y);
    }
}

}  // namespace

void save_dataset(const std::string& dir, const RenderedDataset& ds) {
  fs::create_directories(fs::path(dir) / "images");

  json j;
  j["version"] = 1;
  j["config"] = config_to_json(ds.farm.config);
  json rafts = json::array();
  for (const RaftSpec& r : ds.farm.rafts) {
    json cells = json::array();
    for (const CellSpec& c : r.cells) {
      json seeds = json::array();
      for (const SeedSpec& s : c.seeds)
        seeds.push_back(json::array(
            {s.x, s.y, s.germinated ? 1 : 0, s.germ_time, s.growth_scale}));
      cells.push_back(json::array({c.texture_seed, c.hole_x, c.hole_y, seeds}));
    }
    rafts.push_back(json{{"id", r.raft_id}, {"cells", cells}});
  }
  j["rafts"] = std::move(rafts);
  json placement = json::array();
  for (const GrowPlacement& p : ds.farm.placement)
    placement.push_back(json::array({p.robot, p.slot}));
  j["placement"] = std::move(placement);
  j["seeding_ids"] = ds.farm.seeding_ids;
  j["train_ids"] = ds.farm.train_ids;
  j["query_ids"] = ds.farm.query_ids;

  std::ofstream jf(fs::path(dir) / "farm.json");
  if (!jf) throw Error("cannot write farm.json in " + dir);
  jf << j.dump() << "\n";
  jf.close();

  std::string kp_path = (fs::path(dir) / "keypoints.csv").string();
  std::FILE* kf = std::fopen(kp_path.c_str(), "wb");
  if (!kf) throw Error("cannot write " + kp_path);
  std::fprintf(kf, "frame,raft_id,robot,slot,row,col,true_x,true_y,det_x,det_y\n");
  for (const RenderedFrame& fr : ds.seed_frames) {
    write_pgm((fs::path(dir) / "images" / (fr.name + ".pgm")).string(), fr.image);
    for (const FrameObs& o : fr.obs) write_vertex_rows(kf, fr.name, o);
  }
  for (const RenderedFrame& fr : ds.grow_frames) {
    write_pgm((fs::path(dir) / "images" / (fr.name + ".pgm")).string(), fr.image);
    for (const FrameObs& o : fr.obs) write_vertex_rows(kf, fr.name, o);
  }
  std::fclose(kf);
}

FarmDataset load_farm_specs(const std::string& dir) {
  std::ifstream jf(fs::path(dir) / "farm.json");
  if (!jf) throw Error("missing farm.json in " + dir);
  json j;
  jf >> j;

  FarmDataset ds;
  ds.config = config_from_json(j.at("config"));
  for (const json& rj : j.at("rafts")) {
    RaftSpec r;
    r.raft_id = rj.at("id");
    r.grid_h = ds.config.grid_h;
    r.grid_w = ds.config.grid_w;
    for (const json& cj : rj.at("cells")) {
      CellSpec c;
      c.texture_seed = cj.at(0);
      c.hole_x = cj.at(1);
      c.hole_y = cj.at(2);
      for (const json& sj : cj.at(3)) {
        SeedSpec s;
        s.x = sj.at(0);
        s.y = sj.at(1);
        s.germinated = sj.at(2).get<int>() != 0;
        s.germ_time = sj.at(3);
        s.growth_scale = sj.at(4);
        c.seeds.push_back(s);
      }
      r.cells.push_back(std::move(c));
    }
    ds.rafts.push_back(std::move(r));
  }
  ds.robot_rafts.assign(ds.config.n_grow_robots, {});
  const json& pj = j.at("placement");
  ds.placement.resize(pj.size());
  for (size_t i = 0; i < pj.size(); ++i) {
    ds.placement[i].robot = pj[i].at(0);
    ds.placement[i].slot = pj[i].at(1);
  }
  for (auto& rr : ds.robot_rafts) rr.clear();
  for (size_t i = 0; i < ds.placement.size(); ++i) {
    auto& rr = ds.robot_rafts[ds.placement[i].robot];
    size_t slot = ds.placement[i].slot;
    if (rr.size() <= slot) rr.resize(slot + 1, 0);
    rr[slot] = i;
  }
  ds.seeding_ids = j.at("seeding_ids").get<std::vector<uint64_t>>();
  ds.train_ids = j.at("train_ids").get<std::vector<uint64_t>>();
  ds.query_ids = j.at("query_ids").get<std::vector<uint64_t>>();
  return ds;
}

RenderedDataset load_dataset(const std::string& dir) {
  RenderedDataset out;
  out.farm = load_farm_specs(dir);

  // frame names are derivable from the specs; observations come from the csv
  std::ifstream kf(fs::path(dir) / "keypoints.csv");
  if (!kf) throw Error("missing keypoints.csv in " + dir);
  std::string line;
  std::getline(kf, line);  // header

  struct RawObs {
    uint64_t raft_id;
    int robot, slot;
    std::vector<std::tuple<int, int, Vec2, Vec2>> verts;
  };
  std::map<std::string, std::map<uint64_t, RawObs>> by_frame;
  while (std::getline(kf, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    std::vector<std::string> parts;
    while (std::getline(ss, tok, ',')) parts.push_back(tok);
    if (parts.size() != 10) throw Error("malformed keypoints.csv row");
    RawObs& o = by_frame[parts[0]][std::stoull(parts[1])];
    o.raft_id = std::stoull(parts[1]);
    o.robot = std::stoi(parts[2]);
    o.slot = std::stoi(parts[3]);
    o.verts.emplace_back(std::stoi(parts[4]), std::stoi(parts[5]),
                         Vec2{std::stod(parts[6]), std::stod(parts[7])},
                         Vec2{std::stod(parts[8]), std::stod(parts[9])});
  }

  auto build_frame = [&](const std::string& name) {
    RenderedFrame fr;
    fr.name = name;
    fr.image = read_pgm((fs::path(dir) / "images" / (name + ".pgm")).string());
    auto it = by_frame.find(name);
    if (it == by_frame.end()) throw Error("no keypoints for frame " + name);
    for (auto& [id, raw] : it->second) {
      FrameObs obs;
      obs.raft_id = raw.raft_id;
      obs.robot = raw.robot;
      obs.slot = raw.slot;
      int rows = 0, cols = 0;
      for (auto& [r, c, t, d] : raw.verts) {
        rows = std::max(rows, r + 1);
        cols = std::max(cols, c + 1);
      }
      obs.true_vertices.rows = obs.det_vertices.rows = rows;
      obs.true_vertices.cols = obs.det_vertices.cols = cols;
      obs.true_vertices.pts.resize(static_cast<size_t>(rows) * cols);
      obs.det_vertices.pts.resize(static_cast<size_t>(rows) * cols);
      for (auto& [r, c, t, d] : raw.verts) {
        obs.true_vertices.at(r, c) = t;
        obs.det_vertices.at(r, c) = d;
      }
      fr.obs.push_back(std::move(obs));
    }
    return fr;
  };

  for (uint64_t id : out.farm.seeding_ids)
    out.seed_frames.push_back(build_frame("seed_" + std::to_string(id)));
  for (size_t j = 0; j < out.farm.robot_rafts.size(); ++j)
    out.grow_frames.push_back(build_frame("grow_r" + std::to_string(j)));
  return out;
}

}  // namespace raftmatch
