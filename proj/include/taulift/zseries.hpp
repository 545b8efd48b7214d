#pragma once

#include <map>
#include <optional>

#include "taulift/errors.hpp"
#include "taulift/hscalar.hpp"
#include "taulift/rat.hpp"

namespace taulift {

enum class Parity { Integer, HalfOdd };

inline Parity parity_of(Half e) { return e.twice % 2 == 0 ? Parity::Integer : Parity::HalfOdd; }

inline Parity parity_mul(Parity a, Parity b) {
  return a == b ? Parity::Integer
                : Parity::HalfOdd;  // half+half = integer, int+half = half
}

// Laurent-tail series in z over HScalar. Exponents are bounded above; every
// coefficient at exponent >= lo() is known exactly (absent entries are zero),
// coefficients below lo() are unknown (truncated away).
class ZSeries {
 public:
  ZSeries() : parity_(Parity::Integer), lo_(Half::of_int(0)) {}
  ZSeries(Parity p, Half lo) : parity_(p), lo_(lo) {}
  static ZSeries zero(Parity p, Half lo) { return ZSeries(p, lo); }
  static ZSeries constant(const HScalar& c, Half lo) {
    ZSeries r(Parity::Integer, lo);
    r.set(Half::of_int(0), c);
    return r;
  }

  Parity parity() const { return parity_; }
  Half lo() const { return lo_; }

  void set(Half e, const HScalar& c) {
    if (parity_of(e) != parity_) fail(ErrorCode::ParityMismatch, "exponent parity does not match series parity");
    if (e < lo_) return;  // below the knowledge floor: drop
    if (c.is_zero() && c.is_exact())
      c_.erase(e);
    else
      c_[e] = c;
  }

  HScalar coeff(Half e) const {
    if (e < lo_) fail(ErrorCode::WindowExhausted, "z-coefficient below series truncation window");
    auto it = c_.find(e);
    return it == c_.end() ? HScalar() : it->second;
  }

  HScalar coeff_int(int e) const { return coeff(Half::of_int(e)); }

  bool window_zero() const {
    for (const auto& [e, c] : c_)
      if (!c.is_zero()) return false;
    return true;
  }

  // Largest exponent carrying a stored (possibly window-inexact-zero) coefficient.
  std::optional<Half> top() const {
    if (c_.empty()) return std::nullopt;
    return c_.rbegin()->first;
  }
  Half top_or_lo() const {
    auto t = top();
    return t ? std::max(*t, lo_) : lo_;
  }

  const std::map<Half, HScalar>& terms() const { return c_; }

  ZSeries truncated(Half new_lo) const {
    ZSeries r(parity_, std::max(lo_, new_lo));
    for (const auto& [e, c] : c_)
      if (!(e < r.lo_)) r.c_[e] = c;
    return r;
  }

  ZSeries with_htrunc(int ht) const {
    ZSeries r(parity_, lo_);
    for (const auto& [e, c] : c_) r.set(e, c.with_trunc(ht));
    return r;
  }

  friend ZSeries operator+(const ZSeries& a, const ZSeries& b) { return add_impl(a, b, false); }
  friend ZSeries operator-(const ZSeries& a, const ZSeries& b) { return add_impl(a, b, true); }
  friend ZSeries operator-(const ZSeries& a) {
    ZSeries r(a.parity_, a.lo_);
    for (const auto& [e, c] : a.c_) r.c_[e] = -c;
    return r;
  }

  friend ZSeries operator*(const ZSeries& a, const ZSeries& b) {
    // Unknown tail of one factor meets the top of the other.
    Half lo = std::max(a.lo_ + b.top_or_lo(), b.lo_ + a.top_or_lo());
    ZSeries r(parity_mul(a.parity_, b.parity_), lo);
    for (const auto& [ea, ca] : a.c_)
      for (const auto& [eb, cb] : b.c_) {
        Half e = ea + eb;
        if (e < lo) continue;
        r.set(e, r.coeff(e) + ca * cb);
      }
    return r;
  }

  ZSeries scaled(const HScalar& s) const {
    ZSeries r(parity_, lo_);
    for (const auto& [e, c] : c_) r.set(e, c * s);
    return r;
  }

  ZSeries shifted(Half s) const {
    ZSeries r(parity_mul(parity_, parity_of(s)), lo_ + s);
    for (const auto& [e, c] : c_) r.c_[e + s] = c;
    return r;
  }

  // Equality of coefficients on the common knowledge window.
  friend bool eq_window(const ZSeries& a, const ZSeries& b) {
    if (a.parity_ != b.parity_ && !(a.c_.empty() || b.c_.empty())) return false;
    Half lo = std::max(a.lo_, b.lo_);
    for (const auto& [e, c] : a.c_)
      if (!(e < lo) && !eq_window(c, b.safe_coeff(e))) return false;
    for (const auto& [e, c] : b.c_)
      if (!(e < lo) && !eq_window(c, a.safe_coeff(e))) return false;
    return true;
  }

 private:
  HScalar safe_coeff(Half e) const {
    auto it = c_.find(e);
    return it == c_.end() ? HScalar() : it->second;
  }

  static ZSeries add_impl(const ZSeries& a, const ZSeries& b, bool sub) {
    if (a.parity_ != b.parity_ && !a.c_.empty() && !b.c_.empty())
      fail(ErrorCode::ParityMismatch, "adding series of different exponent parity");
    Parity p = !a.c_.empty() ? a.parity_ : b.parity_;
    ZSeries r(p, std::max(a.lo_, b.lo_));
    for (const auto& [e, c] : a.c_)
      if (!(e < r.lo_)) r.set(e, c);
    for (const auto& [e, c] : b.c_) {
      if (e < r.lo_) continue;
      r.set(e, r.coeff(e) + (sub ? -c : c));
    }
    return r;
  }

  Parity parity_;
  Half lo_;
  std::map<Half, HScalar> c_;
};

}  // namespace taulift
