#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "core/pointset.hpp"

namespace stm {

constexpr int64_t kUnmatched = -1;

// Partial matching between a lattice-side configuration (phi) and a
// sample-side configuration (psi) living on the same box. Partner arrays are
// index maps; kUnmatched marks leftover points on the larger side.
class Matching {
 public:
  Matching(std::shared_ptr<const PointSet> phi, std::shared_ptr<const PointSet> psi);

  // build from explicit partner arrays (validated for mutual consistency)
  static Matching from_partners(std::shared_ptr<const PointSet> phi,
                                std::shared_ptr<const PointSet> psi,
                                std::vector<int64_t> partner_of_phi,
                                std::vector<int32_t> round_of_phi = {});

  const PointSet& phi() const { return *phi_; }
  const PointSet& psi() const { return *psi_; }
  std::shared_ptr<const PointSet> phi_ptr() const { return phi_; }
  std::shared_ptr<const PointSet> psi_ptr() const { return psi_; }

  int64_t partner_of_phi(size_t i) const { return partner_of_phi_[i]; }
  int64_t partner_of_psi(size_t i) const { return partner_of_psi_[i]; }
  int32_t round_of_phi(size_t i) const { return round_of_phi_[i]; }
  size_t matched_count() const { return matched_count_; }
  int32_t round_count() const { return round_count_; }

  // distance between phi point i and its partner (throws if unmatched)
  double pair_dist(size_t i) const;
  // matched pair distances in phi order
  std::vector<double> displacement_norms() const;
  // the matched sample points, in psi order
  PointSet matched_psi_points() const;

  void set_pair(size_t phi_idx, size_t psi_idx, int32_t round);

  void write_csv(const std::string& path) const;
  static Matching read_csv(const std::string& path, std::shared_ptr<const PointSet> phi,
                           std::shared_ptr<const PointSet> psi);

 private:
  std::shared_ptr<const PointSet> phi_, psi_;
  std::vector<int64_t> partner_of_phi_, partner_of_psi_;
  std::vector<int32_t> round_of_phi_;
  size_t matched_count_ = 0;
  int32_t round_count_ = 0;
};

// Iterated mutual-nearest-pair matching: each round pairs every point with
// its reciprocal best live candidate (ties broken by the side-dependent
// preference order), removes the pairs, and repeats until a side runs out.
Matching stable_match(std::shared_ptr<const PointSet> phi, std::shared_ptr<const PointSet> psi);

// Reference implementation: sort all cross pairs globally and sweep, matching
// a pair when both endpoints are still free. Quadratic memory; intended for
// instances up to a few thousand points.
Matching brute_force_match(std::shared_ptr<const PointSet> phi,
                           std::shared_ptr<const PointSet> psi);

// Exhaustive stability audit: returns every pair (phi_idx, psi_idx) in which
// both endpoints strictly prefer each other over their current partners
// (being unmatched loses to any candidate).
std::vector<std::pair<uint32_t, uint32_t>> find_unstable_pairs(const Matching& m);

// Queue-length trace of the one-sided sweep: queue_len[t] counts the phi
// points p < t still waiting at time t (a departure exactly at t counts as
// present), for integer t = 0..floor(side).
struct QueueTrace {
  std::vector<int64_t> queue_len;
  void write_csv(const std::string& path) const;
  static QueueTrace read_csv(const std::string& path);
};

// One-sided (last-in-first-out) matching on the line: sweep left to right,
// phi points queue up, each psi point serves the most recent waiting phi
// point. Coordinates are treated linearly on [0, side); dim must be 1.
std::pair<Matching, QueueTrace> one_sided_match(std::shared_ptr<const PointSet> phi,
                                                std::shared_ptr<const PointSet> psi);

}  // namespace stm
