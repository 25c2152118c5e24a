#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "raftmatch/geometry.hpp"
#include "raftmatch/image.hpp"
#include "raftmatch/rng.hpp"

namespace raftmatch {

struct NoiseParams {
  double vertex_sigma_px = 2.0;  // keypoint jitter, in seeding-view pixels
  double illum_gain_min = 0.80;  // growing-view illumination gain range
  double illum_gain_max = 1.25;
  double res_scale = 0.5;        // growing camera resolution vs seeding
  double placement_jitter = 0.02;  // raft pose jitter, fraction of raft size
};

struct GrowthModelParams {
  double germ_prob_center = 0.85;  // germination probability at the hole
  double germ_prob_slope = 1.2;    // linear falloff per unit cell distance
  double germ_prob_floor = 0.12;
  double seeds_per_cell_mean = 2.2;  // Poisson
  double cluster_frac = 0.5;   // fraction of seeds aimed at the hole
  double cluster_sigma = 0.12;
  double plant_radius_max = 0.30;  // in cell units
  double growth_rate = 0.5;        // radius saturation rate per time step
  double germ_time_max = 2.0;      // sprouting onset drawn from [0, max]
  double wet_darken = 0.90;        // dirt darkening once watering starts
};

struct FarmConfig {
  int n_seed_rafts = 55;
  int n_train_pairs = 38;  // leading seeding rafts; the rest are eval queries
  int n_grow_robots = 100;
  int rafts_per_robot = 10;     // frame capacity of one growing robot
  int n_grow_rafts_total = -1;  // -1 = robots at full capacity
  int grid_h = 8;
  int grid_w = 16;
  int cell_px = 16;  // normalized cell size used for matching
  int seed_px_per_cell = 20;  // seeding-camera resolution
  int growth_steps = 8;
  uint64_t rng_seed = 1;
  NoiseParams noise;
  GrowthModelParams growth;

  int total_grow_rafts() const {
    return n_grow_rafts_total >= 0 ? n_grow_rafts_total
                                   : n_grow_robots * rafts_per_robot;
  }
  void validate() const;  // throws ConfigError
};

struct SeedSpec {
  double x = 0, y = 0;        // normalized cell coordinates
  bool germinated = false;    // drawn once at generation time
  double germ_time = 0;       // sprouting onset
  double growth_scale = 1.0;  // per-plant size factor
  double radius = 0;          // current plant radius, set by apply_growth
};

struct CellSpec {
  uint64_t texture_seed = 0;
  double hole_x = 0.5, hole_y = 0.5;
  std::vector<SeedSpec> seeds;
};

struct RaftSpec {
  uint64_t raft_id = 0;
  int grid_h = 0, grid_w = 0;
  double growth_t = 0;
  std::vector<CellSpec> cells;  // row-major

  const CellSpec& cell(int cx, int cy) const {
    return cells[static_cast<size_t>(cy) * grid_w + cx];
  }
  CellSpec& cell(int cx, int cy) {
    return cells[static_cast<size_t>(cy) * grid_w + cx];
  }
};

struct GrowPlacement {
  int robot = -1;
  int slot = -1;
};

struct FarmDataset {
  FarmConfig config;
  std::vector<RaftSpec> rafts;  // raft_id == index; state at t = 0
  std::vector<uint64_t> seeding_ids;
  std::vector<uint64_t> train_ids;
  std::vector<uint64_t> query_ids;
  std::vector<std::vector<uint64_t>> robot_rafts;  // robot -> slot -> raft_id
  std::vector<GrowPlacement> placement;            // indexed by raft_id
};

// Deterministic in the config seed. Seeding rafts are assigned to uniformly
// random growing slots (a bijection onto a subset); every remaining slot is
// filled with a distractor raft that shares the grid geometry exactly.
FarmDataset gen_farm(const FarmConfig& config);

// Advances a raft to time t (t >= raft.growth_t): germinated seeds gain
// radius monotonically, textures are untouched.
RaftSpec apply_growth(const RaftSpec& raft, double t,
                      const GrowthModelParams& params);

double germination_probability(const GrowthModelParams& params,
                               double dist_from_hole);

// Continuous raft appearance at raft coordinates (U,V) in [0,grid_w]x[0,grid_h].
double eval_raft_intensity(const RaftSpec& raft, double U, double V,
                           const GrowthModelParams& params);

struct FrameObs {
  uint64_t raft_id = 0;
  int robot = -1;  // -1 for the seeding view
  int slot = -1;
  VertexGrid true_vertices;
  VertexGrid det_vertices;  // with injected detector noise
};

struct RenderedFrame {
  std::string name;
  Image image;
  std::vector<FrameObs> obs;
  double illum_gain = 1.0;
};

// Single-raft seeding view at native resolution, gain 1.
RenderedFrame render_seeding(const RaftSpec& raft, const FarmConfig& cfg);

// One growing robot's frame holding all of its rafts (in the states passed
// in), downscaled by res_scale with a per-robot illumination gain. Placement
// and gain are keyed by robot id so repeated captures of the same bench stay
// registered.
RenderedFrame render_growing(const std::vector<RaftSpec>& rafts, int robot_id,
                             const FarmConfig& cfg);

VertexGrid jitter_vertices(const VertexGrid& vertices, double sigma_px, Rng& rng);

// All frames of the matching dataset: seeding views at t=0, growing frames
// at t = growth_steps.
struct RenderedDataset {
  FarmDataset farm;
  std::vector<RenderedFrame> seed_frames;  // by seeding index
  std::vector<RenderedFrame> grow_frames;  // by robot id
};
RenderedDataset render_farm(const FarmDataset& farm);

// Growing frames of one robot across t = 0..growth_steps.
std::vector<RenderedFrame> render_growth_series(const FarmDataset& farm,
                                                int robot);

// Directory layout: farm.json, keypoints.csv, images/*.pgm
void save_dataset(const std::string& dir, const RenderedDataset& ds);
RenderedDataset load_dataset(const std::string& dir);
FarmDataset load_farm_specs(const std::string& dir);

}  // namespace raftmatch
