#include "core/geometry.hpp"

#include "core/errors.hpp"

namespace stm {

namespace {

// -1: a preferred, +1: b preferred, 0: indistinguishable without indices
int compare_candidates(const double* z, const double* a, const double* b, Side side,
                       const Box& box) {
  const double da2 = dist2(z, a, box);
  const double db2 = dist2(z, b, box);
  if (da2 < db2) return -1;
  if (da2 > db2) return +1;
  double da[kMaxDim], db[kMaxDim];
  displacement(z, a, box, da);
  displacement(z, b, box, db);
  return compare_tie(da, db, box.dim, side);
}

}  // namespace

bool prefers(const double* z, const double* a, const double* b, Side side, const Box& box) {
  return compare_candidates(z, a, b, side, box) < 0;
}

bool prefers_idx(const double* z, const double* a, uint32_t ia, const double* b, uint32_t ib,
                 Side side, const Box& box) {
  const int c = compare_candidates(z, a, b, side, box);
  if (c != 0) return c < 0;
  return ia < ib;
}

}  // namespace stm
