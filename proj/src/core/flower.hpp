#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "core/grid.hpp"
#include "core/matching.hpp"

namespace stm {

constexpr uint64_t kDefaultBudget = 1000000;

struct Ball {
  std::array<double, kMaxDim> center{0.0, 0.0, 0.0};
  double radius = 0.0;
};

// Region that certifies a point's match: the union of balls grown along every
// chain that competes with the anchor's pair. Re-running the matching after
// any modification outside the flower leaves the anchor's partner unchanged.
// An unmatched anchor gets the sentinel flower (the whole space).
struct Flower {
  Side anchor_side = Side::phi;
  uint32_t anchor_index = 0;
  std::array<double, kMaxDim> anchor{0.0, 0.0, 0.0};
  int64_t partner_index = -1;  // opposite-side index, -1 when unmatched
  std::array<double, kMaxDim> partner{0.0, 0.0, 0.0};
  bool sentinel = false;
  std::vector<Ball> balls;  // sorted, exact duplicates removed
  double bounding_radius = 0.0;  // max over balls of |center-anchor|+radius

  bool intersects_ball(const double* center, double radius, const Box& box) const;
  bool inside_box(const double* lo, const double* hi, int dim) const;
  void write_csv(const std::string& path, const Box& box) const;
};

// Shared lookup state for computing many flowers against one matching.
class FlowerEngine {
 public:
  explicit FlowerEngine(const Matching& m);
  const Matching& matching() const { return *m_; }
  Flower flower(Side side, uint32_t index, uint64_t budget = kDefaultBudget) const;

 private:
  const Matching* m_;
  NeighborIndex gphi_, gpsi_;
};

Flower matching_flower(const Matching& m, Side side, uint32_t index,
                       uint64_t budget = kDefaultBudget);

// Alternating chain with non-increasing steps: every interior element prefers
// its successor over its predecessor. Elements alternate sides starting from
// `start_side`; entries are point indices on the respective side.
struct Chain {
  Side start_side = Side::phi;
  std::vector<uint32_t> idx;
};

struct ChainSearch {
  uint64_t count = 0;          // chains of the full requested length
  std::vector<Chain> chains;   // populated when collect=true
};

// All descending chains of exactly 2n+1 points starting at `start` whose
// first step is at most b. exists_only stops at the first hit.
ChainSearch descending_chains(const PointSet& phi, const PointSet& psi, Side start_side,
                              uint32_t start, double b, int n, uint64_t budget,
                              bool collect = false, bool exists_only = false);

// Checks that clipping the instance to the window W = [lo,hi]^dim is
// invisible to the anchor: the full-instance flower lies inside W exactly
// when the clipped-instance flower does, and in that case both instances give
// the anchor the same partner. Free-space boxes only.
bool verify_stopping_set(const PointSet& phi, const PointSet& psi, const double* z,
                         const double* lo, const double* hi, uint64_t budget = kDefaultBudget);

// Whether the cube [lo,hi] decides the match of the integer lattice point q:
// the flower of q in the instance clipped to the cube stays inside the cube.
// Free-space metric; the lattice side of the clipped instance is the set of
// integer points in the cube.
bool is_decisive(const double* lo, const double* hi, int dim, const double* q,
                 const PointSet& psi, uint64_t budget = kDefaultBudget);

// Outcome of reconstructing the count of matched sample points inside a
// removed ball A from the outside configuration only.
struct RigidityRecord {
  std::array<double, kMaxDim> center{0.0, 0.0, 0.0};
  double radius = 0.0;
  int64_t undecided_out = 0;   // lattice points outside A whose flower reaches A
  int64_t lattice_in = 0;      // lattice points inside A
  int64_t undecided_samples = 0;  // surviving samples whose flower reaches A
  int64_t recovered = 0;       // undecided_out + lattice_in - undecided_samples
  int64_t truth = 0;           // matched samples actually inside A
  bool conclusive = true;
  std::string reason;          // set when inconclusive
};

// m must be a matching of the full lattice against a sample on the torus.
// Deletes the matched samples inside the closed ball A = B(center, radius),
// re-matches, and counts undecided points via their flowers. Inconclusive
// when a flower wraps half the torus or `budget` runs out.
RigidityRecord rigidity_recover(const Matching& m, const double* center, double radius,
                                uint64_t budget = kDefaultBudget);

}  // namespace stm
