#pragma once

#include <stdexcept>
#include <vector>

namespace jlab {

// Equally spaced quadrature nodes on the circle [0, 1) with uniform weights.
// The trapezoid rule on the circle is exact for trigonometric polynomials of
// degree < m, for any node offset.  "Punctured" grids are offset by 1/4 of a
// cell so that no node hits the degeneracy points {0, 1/2}.
class ThetaGrid {
 public:
  static ThetaGrid plain(int m) { return ThetaGrid(m, 0.0); }
  static ThetaGrid punctured(int m) { return ThetaGrid(m, 0.25); }

  int m() const { return m_; }
  double node(int j) const { return (static_cast<double>(j) + offset_) / m_; }
  double weight(int) const { return 1.0 / m_; }
  bool is_punctured() const { return offset_ != 0.0; }

  std::vector<double> nodes() const {
    std::vector<double> out(static_cast<std::size_t>(m_));
    for (int j = 0; j < m_; ++j) out[static_cast<std::size_t>(j)] = node(j);
    return out;
  }

 private:
  ThetaGrid(int m, double offset) : m_(m), offset_(offset) {
    if (m < 1) throw std::invalid_argument("ThetaGrid: need at least one node");
  }

  int m_;
  double offset_;  // in units of the cell width 1/m
};

}  // namespace jlab
