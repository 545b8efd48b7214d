#pragma once

#include <vector>

#include "taulift/errors.hpp"
#include "taulift/hscalar.hpp"
#include "taulift/zseries.hpp"

namespace taulift {

// Rectangular window of exactly-known coefficients of a series in u, v (integer
// exponents). Coefficients outside the window are unknown, never assumed zero,
// unless the corresponding exact-top flag certifies that everything above the
// window top in that variable vanishes.
class BiSeries {
 public:
  BiSeries() : ulo_(0), uhi_(-1), vlo_(0), vhi_(-1) {}
  BiSeries(int ulo, int uhi, int vlo, int vhi, bool utop_exact = false, bool vtop_exact = false)
      : ulo_(ulo), uhi_(uhi), vlo_(vlo), vhi_(vhi), utop_exact_(utop_exact), vtop_exact_(vtop_exact) {
    if (uhi_ < ulo_ || vhi_ < vlo_) fail(ErrorCode::BadConfig, "empty BiSeries window");
    c_.assign(static_cast<size_t>(uhi_ - ulo_ + 1) * static_cast<size_t>(vhi_ - vlo_ + 1), HScalar());
  }

  int ulo() const { return ulo_; }
  int uhi() const { return uhi_; }
  int vlo() const { return vlo_; }
  int vhi() const { return vhi_; }
  bool utop_exact() const { return utop_exact_; }
  bool vtop_exact() const { return vtop_exact_; }
  void set_tops_exact(bool u, bool v) {
    utop_exact_ = u;
    vtop_exact_ = v;
  }

  bool in_window(int a, int b) const { return ulo_ <= a && a <= uhi_ && vlo_ <= b && b <= vhi_; }
  bool known(int a, int b) const {
    bool uok = (ulo_ <= a && a <= uhi_) || (utop_exact_ && a > uhi_);
    bool vok = (vlo_ <= b && b <= vhi_) || (vtop_exact_ && b > vhi_);
    return uok && vok;
  }

  HScalar at(int a, int b) const {
    if (!known(a, b)) fail(ErrorCode::WindowExhausted, "coefficient outside the certified window");
    if (!in_window(a, b)) return HScalar();
    return c_[idx(a, b)];
  }

  void set(int a, int b, const HScalar& c) {
    if (!in_window(a, b)) {
      if (known(a, b) && c.is_zero()) return;  // exactly-zero region
      fail(ErrorCode::WindowExhausted, "writing outside the BiSeries window");
    }
    c_[idx(a, b)] = c;
  }

  void add_at(int a, int b, const HScalar& c) {
    if (!in_window(a, b)) return;  // contributions outside the stored window are dropped
    c_[idx(a, b)] += c;
  }

  friend BiSeries operator+(const BiSeries& x, const BiSeries& y) { return add_impl(x, y, false); }
  friend BiSeries operator-(const BiSeries& x, const BiSeries& y) { return add_impl(x, y, true); }

  BiSeries scaled(const HScalar& s) const {
    BiSeries r = *this;
    for (auto& c : r.c_) c *= s;
    return r;
  }

  // Restrict to a subwindow (must be contained in the known region).
  BiSeries restricted(int ulo, int uhi, int vlo, int vhi) const {
    BiSeries r(ulo, uhi, vlo, vhi, utop_exact_ && uhi >= uhi_, vtop_exact_ && vhi >= vhi_);
    for (int a = ulo; a <= uhi; ++a)
      for (int b = vlo; b <= vhi; ++b) r.set(a, b, at(a, b));
    return r;
  }

  // True when every coefficient on the common known region agrees exactly
  // (on the common hbar accuracy window).
  friend bool eq_window(const BiSeries& x, const BiSeries& y) {
    int alo = std::max(x.ulo_, y.ulo_), ahi = std::min(x.uhi_, y.uhi_);
    int blo = std::max(x.vlo_, y.vlo_), bhi = std::min(x.vhi_, y.vhi_);
    for (int a = alo; a <= ahi; ++a)
      for (int b = blo; b <= bhi; ++b)
        if (!eq_window(x.at(a, b), y.at(a, b))) return false;
    return true;
  }

  bool window_zero() const {
    for (const auto& c : c_)
      if (!c.is_zero()) return false;
    return true;
  }

 private:
  static BiSeries add_impl(const BiSeries& x, const BiSeries& y, bool sub) {
    auto hi_eff = [](int hi, bool ex) { return ex ? kTruncInf : hi; };
    int uhe = std::min(hi_eff(x.uhi_, x.utop_exact_), hi_eff(y.uhi_, y.utop_exact_));
    int vhe = std::min(hi_eff(x.vhi_, x.vtop_exact_), hi_eff(y.vhi_, y.vtop_exact_));
    bool uex = uhe == kTruncInf, vex = vhe == kTruncInf;
    int uhi = uex ? std::max(x.uhi_, y.uhi_) : uhe;
    int vhi = vex ? std::max(x.vhi_, y.vhi_) : vhe;
    BiSeries r(std::max(x.ulo_, y.ulo_), uhi, std::max(x.vlo_, y.vlo_), vhi, uex, vex);
    for (int a = r.ulo_; a <= r.uhi_; ++a)
      for (int b = r.vlo_; b <= r.vhi_; ++b) {
        HScalar v = x.at(a, b);
        HScalar w = y.at(a, b);
        r.set(a, b, sub ? v - w : v + w);
      }
    return r;
  }

  size_t idx(int a, int b) const {
    return static_cast<size_t>(a - ulo_) * static_cast<size_t>(vhi_ - vlo_ + 1) +
           static_cast<size_t>(b - vlo_);
  }

  int ulo_, uhi_, vlo_, vhi_;
  bool utop_exact_ = false, vtop_exact_ = false;
  std::vector<HScalar> c_;
};

enum class KernelKind { KP, BKP };

// The two-point vacuum kernels expanded in the region |u| > |v|.
// KP: 1/(u-v) = sum_{k>=0} u^{-k-1} v^k.
// BKP: (u-v)/(2(u+v)) = 1/2 + sum_{k>=1} (-1)^k u^{-k} v^k.
inline BiSeries kernel_expand(KernelKind kind, int ulo, int uhi, int vlo, int vhi) {
  BiSeries r(ulo, uhi, vlo, vhi, /*utop_exact=*/true, /*vtop_exact=*/false);
  if (kind == KernelKind::KP) {
    for (int k = 0;; ++k) {
      int a = -k - 1, b = k;
      if (b > vhi && a < ulo) break;
      if (r.in_window(a, b)) r.set(a, b, HScalar(1));
      if (k > uhi - ulo + vhi - vlo + 4) break;
    }
    // exact above u^{-1}: all exponents are <= -1
    if (uhi < -1) r.set_tops_exact(false, false);
  } else {
    if (r.in_window(0, 0)) r.set(0, 0, HScalar(Rat(1, 2)));
    for (int k = 1; k <= std::max(vhi, -ulo) + 2; ++k) {
      int a = -k, b = k;
      if (r.in_window(a, b)) r.set(a, b, HScalar(Rat(k % 2 ? -1 : 1)));
    }
    if (uhi < 0) r.set_tops_exact(false, false);
  }
  return r;
}

// Coefficient (a,b) = fu[a] * gv[b]; both inputs must have exact tops (ZSeries
// always do) and integer parity.
inline BiSeries bs_separable_product(const ZSeries& fu, const ZSeries& gv, int ulo, int uhi,
                                     int vlo, int vhi) {
  if ((!fu.window_zero() && fu.parity() != Parity::Integer) ||
      (!gv.window_zero() && gv.parity() != Parity::Integer))
    fail(ErrorCode::ParityMismatch, "separable product needs integer-parity factors");
  if (Half::of_int(ulo) < fu.lo() || Half::of_int(vlo) < gv.lo())
    fail(ErrorCode::WindowExhausted, "separable product window deeper than factor windows");
  BiSeries r(ulo, uhi, vlo, vhi, true, true);
  for (int a = ulo; a <= uhi; ++a) {
    HScalar fa = fu.coeff_int(a);
    if (fa.is_zero() && fa.is_exact()) continue;
    for (int b = vlo; b <= vhi; ++b) r.set(a, b, fa * gv.coeff_int(b));
  }
  // tops exact only if the window reaches the factors' true tops
  bool uex = !fu.top() || !(Half::of_int(uhi) < *fu.top());
  bool vex = !gv.top() || !(Half::of_int(vhi) < *gv.top());
  r.set_tops_exact(uex, vex);
  return r;
}

}  // namespace taulift
