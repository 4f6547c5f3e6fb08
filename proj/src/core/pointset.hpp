#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/geometry.hpp"

namespace stm {

enum class PointLabel : uint8_t { lattice = 0, sample = 1 };

const char* to_string(PointLabel label);
PointLabel point_label_from_string(const std::string& s);

// Finite point configuration in a box. Coordinates are stored flat
// (point-major, stride = box.dim); periodic boxes require every coordinate in
// [0, side), free-space boxes only finiteness. Iteration order is the
// insertion order and stays stable.
class PointSet {
 public:
  PointSet(Box box, std::vector<double> coords, PointLabel label, uint64_t seed);

  const Box& box() const { return box_; }
  int dim() const { return box_.dim; }
  size_t size() const { return coords_.size() / static_cast<size_t>(box_.dim); }
  bool empty() const { return coords_.empty(); }
  PointLabel label() const { return label_; }
  uint64_t seed() const { return seed_; }

  const double* point(size_t i) const { return coords_.data() + i * static_cast<size_t>(box_.dim); }
  const std::vector<double>& coords() const { return coords_; }

  // copy with one extra point appended (same box/label, seed preserved)
  PointSet with_point(const double* p) const;
  // copy keeping points whose original index passes `keep[i]`
  PointSet filtered(const std::vector<char>& keep) const;

  void write_csv(const std::string& path) const;
  static PointSet read_csv(const std::string& path);

 private:
  Box box_;
  std::vector<double> coords_;
  PointLabel label_;
  uint64_t seed_;
};

}  // namespace stm
