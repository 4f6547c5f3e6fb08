#include "core/pointset.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "core/errors.hpp"

namespace stm {

const char* to_string(PointLabel label) {
  return label == PointLabel::lattice ? "lattice" : "sample";
}

PointLabel point_label_from_string(const std::string& s) {
  if (s == "lattice") return PointLabel::lattice;
  if (s == "sample") return PointLabel::sample;
  throw InvalidArgument("unknown point label: " + s);
}

PointSet::PointSet(Box box, std::vector<double> coords, PointLabel label, uint64_t seed)
    : box_(box), coords_(std::move(coords)), label_(label), seed_(seed) {
  if (box_.dim < 1 || box_.dim > kMaxDim) throw InvalidArgument("PointSet: dim must be 1..3");
  if (!(box_.side > 0.0)) throw InvalidArgument("PointSet: box side must be positive");
  if (coords_.size() % static_cast<size_t>(box_.dim) != 0)
    throw InvalidArgument("PointSet: coordinate count not a multiple of dim");
  if (box_.periodic) {
    // torus coordinates are kept canonical so serialisation round-trips
    for (double c : coords_) {
      if (!(c >= 0.0 && c < box_.side))
        throw InvalidArgument("PointSet: coordinate outside [0, side)");
    }
  } else {
    for (double c : coords_) {
      if (!std::isfinite(c)) throw InvalidArgument("PointSet: non-finite coordinate");
    }
  }
}

PointSet PointSet::with_point(const double* p) const {
  std::vector<double> c = coords_;
  c.insert(c.end(), p, p + box_.dim);
  return PointSet(box_, std::move(c), label_, seed_);
}

PointSet PointSet::filtered(const std::vector<char>& keep) const {
  if (keep.size() != size()) throw InvalidArgument("PointSet::filtered: mask size mismatch");
  std::vector<double> c;
  c.reserve(coords_.size());
  for (size_t i = 0; i < size(); ++i) {
    if (keep[i]) c.insert(c.end(), point(i), point(i) + box_.dim);
  }
  return PointSet(box_, std::move(c), label_, seed_);
}

void PointSet::write_csv(const std::string& path) const {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot open for writing: " + path);
  std::fprintf(f, "# d=%d L=%.17g label=%s seed=%llu\n", box_.dim, box_.side,
               to_string(label_), static_cast<unsigned long long>(seed_));
  const size_t n = size();
  for (size_t i = 0; i < n; ++i) {
    const double* p = point(i);
    for (int k = 0; k < box_.dim; ++k)
      std::fprintf(f, k ? ",%.17g" : "%.17g", p[k]);
    std::fputc('\n', f);
  }
  if (std::fclose(f) != 0) throw IoError("write failed: " + path);
}

PointSet PointSet::read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty point file: " + path);
  int d = 0;
  double L = 0.0;
  char label_buf[32] = {0};
  unsigned long long seed = 0;
  if (std::sscanf(line.c_str(), "# d=%d L=%lg label=%31s seed=%llu", &d, &L, label_buf, &seed) != 4)
    throw IoError("malformed point header: " + line);
  std::vector<double> coords;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string cell;
    int k = 0;
    while (std::getline(row, cell, ',')) {
      coords.push_back(std::stod(cell));
      ++k;
    }
    if (k != d) throw IoError("row arity mismatch in " + path);
  }
  Box box{d, L, true};
  return PointSet(box, std::move(coords), point_label_from_string(label_buf), seed);
}

}  // namespace stm
