#pragma once

#include <map>
#include <optional>
#include <string>

#include "taulift/errors.hpp"
#include "taulift/rat.hpp"

namespace taulift {

// Exponent bound meaning "exact at every order" (pure rationals, finite sums).
inline constexpr int kTruncInf = 1 << 28;

inline int sat_add(int a, int b) {
  if (a >= kTruncInf || b >= kTruncInf) return kTruncInf;
  if (a <= -kTruncInf || b <= -kTruncInf) return -kTruncInf;
  long s = static_cast<long>(a) + static_cast<long>(b);
  if (s >= kTruncInf) return kTruncInf;
  if (s <= -kTruncInf) return -kTruncInf;
  return static_cast<int>(s);
}

// Truncated Laurent series in the formal parameter hbar over exact rationals.
// Coefficients at exponents <= trunc() are exact; above trunc() they are unknown.
class HScalar {
 public:
  HScalar() : trunc_(kTruncInf) {}
  explicit HScalar(const Rat& c, int trunc = kTruncInf) : trunc_(trunc) {
    if (c != 0 && 0 <= trunc_) terms_[0] = c;
  }
  explicit HScalar(long c, int trunc = kTruncInf) : HScalar(Rat(c), trunc) {}

  static HScalar zero(int trunc = kTruncInf) { return HScalar(Rat(0), trunc); }
  static HScalar one(int trunc = kTruncInf) { return HScalar(Rat(1), trunc); }
  static HScalar monomial(const Rat& c, int h_exp, int trunc = kTruncInf) {
    HScalar r;
    r.trunc_ = trunc;
    if (c != 0 && h_exp <= trunc) r.terms_[h_exp] = c;
    return r;
  }
  // hbar itself.
  static HScalar hbar(int trunc = kTruncInf) { return monomial(Rat(1), 1, trunc); }

  int trunc() const { return trunc_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_exact() const { return trunc_ == kTruncInf; }

  std::optional<int> val_min() const {
    if (terms_.empty()) return std::nullopt;
    return terms_.begin()->first;
  }
  int val_or(int if_zero) const {
    auto v = val_min();
    return v ? *v : if_zero;
  }

  Rat coeff(int h_exp) const {
    if (h_exp > trunc_) fail(ErrorCode::WindowExhausted, "hbar coefficient beyond truncation order");
    auto it = terms_.find(h_exp);
    return it == terms_.end() ? Rat(0) : it->second;
  }

  const std::map<int, Rat>& terms() const { return terms_; }

  HScalar with_trunc(int trunc) const {
    HScalar r;
    r.trunc_ = std::min(trunc_, trunc);
    for (const auto& [e, c] : terms_)
      if (e <= r.trunc_) r.terms_[e] = c;
    return r;
  }

  friend HScalar operator+(const HScalar& a, const HScalar& b) { return add_impl(a, b, false); }
  friend HScalar operator-(const HScalar& a, const HScalar& b) { return add_impl(a, b, true); }
  friend HScalar operator-(const HScalar& a) {
    HScalar r;
    r.trunc_ = a.trunc_;
    for (const auto& [e, c] : a.terms_) r.terms_[e] = -c;
    return r;
  }

  friend HScalar operator*(const HScalar& a, const HScalar& b) {
    HScalar r;
    // Unknown tails enter the product shifted by the other factor's valuation.
    int ta = a.terms_.empty() ? kTruncInf : sat_add(a.trunc_, b.val_or(kTruncInf));
    int tb = b.terms_.empty() ? kTruncInf : sat_add(b.trunc_, a.val_or(kTruncInf));
    r.trunc_ = std::min({sat_add(a.trunc_, b.val_or(kTruncInf)), sat_add(b.trunc_, a.val_or(kTruncInf))});
    if (a.terms_.empty() || b.terms_.empty()) {
      r.trunc_ = std::min(ta, tb);
      return r;
    }
    for (const auto& [ea, ca] : a.terms_)
      for (const auto& [eb, cb] : b.terms_) {
        int e = sat_add(ea, eb);
        if (e > r.trunc_) continue;
        Rat& slot = r.terms_[e];
        slot += ca * cb;
        if (slot == 0) r.terms_.erase(e);
      }
    return r;
  }

  friend HScalar operator*(const HScalar& a, const Rat& c) { return a * HScalar(c); }
  friend HScalar operator*(const Rat& c, const HScalar& a) { return a * HScalar(c); }

  HScalar& operator+=(const HScalar& o) { return *this = *this + o; }
  HScalar& operator-=(const HScalar& o) { return *this = *this - o; }
  HScalar& operator*=(const HScalar& o) { return *this = *this * o; }

  // Multiplicative inverse; requires a nonzero leading coefficient.
  HScalar inv() const {
    if (terms_.empty()) fail(ErrorCode::ZeroInverse, "inverse of (window-)zero HScalar");
    int v = *val_min();
    Rat lead = terms_.begin()->second;
    // a = lead * h^v * (1 + r), val(r) >= 1.
    int out_trunc = trunc_ == kTruncInf ? kTruncInf : sat_add(trunc_, -2 * v);
    HScalar r;  // the tail part, shifted to valuation >= 1
    r.trunc_ = sat_add(trunc_, -v);
    for (auto it = std::next(terms_.begin()); it != terms_.end(); ++it)
      r.terms_[it->first - v] = it->second / lead;
    HScalar acc = HScalar::one(sat_add(out_trunc, v));
    HScalar pw = HScalar::one(sat_add(out_trunc, v));
    int rv = r.val_or(kTruncInf);
    if (rv < kTruncInf) {
      int limit = sat_add(out_trunc, v);
      for (long k = 1; k * rv <= limit && limit < kTruncInf; ++k) {
        pw = pw * -r;
        acc += pw;
      }
      if (limit >= kTruncInf)  // exact finite input with a finite geometric tail cannot happen
        fail(ErrorCode::WindowExhausted, "inverse of non-monomial exact HScalar needs a finite truncation");
    }
    HScalar out;
    out.trunc_ = out_trunc;
    for (const auto& [e, c] : acc.terms_) {
      if (e - v > out_trunc) continue;
      out.terms_[e - v] = c / lead;
    }
    return out;
  }

  // exp of a series with strictly positive hbar-valuation.
  HScalar exp() const {
    if (terms_.empty()) return HScalar::one(trunc_);
    int v = *val_min();
    if (v <= 0) fail(ErrorCode::NonPositiveValuation, "exp needs valuation >= 1 in hbar");
    if (trunc_ == kTruncInf)
      fail(ErrorCode::WindowExhausted, "exp of a nonzero series needs a finite truncation");
    HScalar acc = HScalar::one(trunc_);
    HScalar pw = HScalar::one(trunc_);
    Rat fact(1);
    for (long m = 1; m * v <= trunc_; ++m) {
      pw = pw * *this;
      fact *= Rat(m);
      acc += pw * HScalar(Rat(1) / fact);
    }
    return acc;
  }

  HScalar pow(long e) const {
    HScalar acc = HScalar::one(trunc_);
    if (e == 0) return acc;
    HScalar b = e > 0 ? *this : inv();
    for (long i = 0; i < (e > 0 ? e : -e); ++i) acc = acc * b;
    return acc;
  }

  // Exact equality of the stored terms on the common accuracy window.
  friend bool eq_window(const HScalar& a, const HScalar& b) {
    int t = std::min(a.trunc_, b.trunc_);
    auto ia = a.terms_.begin();
    auto ib = b.terms_.begin();
    while (ia != a.terms_.end() && ia->first > t) ++ia;  // cannot happen; terms bounded by trunc
    for (int e = -kTruncInf; ia != a.terms_.end() || ib != b.terms_.end();) {
      (void)e;
      if (ia != a.terms_.end() && ia->first > t) break;
      if (ib != b.terms_.end() && ib->first > t) {
        ib = b.terms_.end();
        continue;
      }
      if (ia == a.terms_.end()) {
        if (ib->first <= t) return false;
        ++ib;
        continue;
      }
      if (ib == b.terms_.end()) {
        if (ia->first <= t) return false;
        ++ia;
        continue;
      }
      if (ia->first != ib->first || ia->second != ib->second) return false;
      ++ia;
      ++ib;
    }
    return true;
  }

  friend bool operator==(const HScalar& a, const HScalar& b) {
    return a.terms_ == b.terms_ && a.trunc_ == b.trunc_;
  }

  std::string str() const;

 private:
  static HScalar add_impl(const HScalar& a, const HScalar& b, bool sub) {
    HScalar r;
    r.trunc_ = std::min(a.trunc_, b.trunc_);
    for (const auto& [e, c] : a.terms_)
      if (e <= r.trunc_) r.terms_[e] = c;
    for (const auto& [e, c] : b.terms_) {
      if (e > r.trunc_) continue;
      Rat& slot = r.terms_[e];
      slot += sub ? -c : c;
      if (slot == 0) r.terms_.erase(e);
    }
    return r;
  }

  std::map<int, Rat> terms_;
  int trunc_;
};

}  // namespace taulift
