#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "jlab/errors.hpp"

namespace jlab {

using cplx = std::complex<double>;

// Complex amplitudes on an integer window [lo, hi] with a declared support
// [support_lo, support_hi].  Everything outside the support is exactly zero;
// operators grow the support and must stay inside the window.
class WindowedState {
 public:
  WindowedState() = default;

  WindowedState(int lo, int hi)
      : lo_(lo), hi_(hi), support_lo_(0), support_hi_(-1),
        amp_(static_cast<std::size_t>(hi - lo + 1), cplx{0.0, 0.0}) {
    if (hi < lo) throw std::invalid_argument("WindowedState: empty window");
  }

  static WindowedState delta(int site, int lo, int hi) {
    WindowedState s(lo, hi);
    s.set(site, cplx{1.0, 0.0});
    return s;
  }

  int lo() const { return lo_; }
  int hi() const { return hi_; }
  int support_lo() const { return support_lo_; }
  int support_hi() const { return support_hi_; }
  bool support_empty() const { return support_hi_ < support_lo_; }

  bool contains(int n) const { return n >= lo_ && n <= hi_; }

  cplx operator[](int n) const {
    return contains(n) ? amp_[static_cast<std::size_t>(n - lo_)] : cplx{0.0, 0.0};
  }

  void set(int n, cplx v) {
    if (!contains(n))
      throw WindowOverflowError("WindowedState::set: site outside window");
    amp_[static_cast<std::size_t>(n - lo_)] = v;
    if (v != cplx{0.0, 0.0}) {
      if (support_empty()) {
        support_lo_ = support_hi_ = n;
      } else {
        support_lo_ = std::min(support_lo_, n);
        support_hi_ = std::max(support_hi_, n);
      }
    }
  }

  // Declares the support without scanning; used by operators that know how
  // far they spread.  Throws if the claim does not fit the window.
  void declare_support(int slo, int shi) {
    if (shi >= slo && (slo < lo_ || shi > hi_))
      throw WindowOverflowError("WindowedState::declare_support: support exceeds window");
    support_lo_ = slo;
    support_hi_ = shi;
  }

  double norm_sq() const {
    double s = 0.0;
    for (const cplx& v : amp_) s += std::norm(v);
    return s;
  }

  double norm() const { return std::sqrt(norm_sq()); }

  double l1_norm() const {
    double s = 0.0;
    for (const cplx& v : amp_) s += std::abs(v);
    return s;
  }

  void scale(double c) {
    for (cplx& v : amp_) v *= c;
  }

  void normalize() {
    const double n = norm();
    if (n > 0.0) scale(1.0 / n);
  }

  cplx inner(const WindowedState& other) const {  // <this, other>
    const int a = std::max(lo_, other.lo_);
    const int b = std::min(hi_, other.hi_);
    cplx s{0.0, 0.0};
    for (int n = a; n <= b; ++n) s += std::conj((*this)[n]) * other[n];
    return s;
  }

  // max |this_n - other_n| over the union of windows
  double max_abs_diff(const WindowedState& other) const {
    const int a = std::min(lo_, other.lo_);
    const int b = std::max(hi_, other.hi_);
    double m = 0.0;
    for (int n = a; n <= b; ++n) m = std::max(m, std::abs((*this)[n] - other[n]));
    return m;
  }

  double dist(const WindowedState& other) const {
    const int a = std::min(lo_, other.lo_);
    const int b = std::max(hi_, other.hi_);
    double s = 0.0;
    for (int n = a; n <= b; ++n) s += std::norm((*this)[n] - other[n]);
    return std::sqrt(s);
  }

 private:
  int lo_ = 0;
  int hi_ = -1;
  int support_lo_ = 0;
  int support_hi_ = -1;
  std::vector<cplx> amp_;
};

}  // namespace jlab
