#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <tuple>
#include <utility>
#include <vector>

#include "taulift/biseries.hpp"
#include "taulift/errors.hpp"
#include "taulift/hscalar.hpp"
#include "taulift/zseries.hpp"

namespace taulift {

// An operator on Laurent series given by its action on monomials:
//   z^n  |->  sum over shifts s of  eigen(s, n) * z^{n+s}.
// Shifts are bounded above by s_max(); s_min() is absent for operators with an
// infinite downward tail (multiplication by a Laurent-tail series). eval() is
// memoized, so deep compositions stay cheap.
class OpSymbol {
 public:
  using Eval = std::function<HScalar(int s, Half n, int htrunc)>;

  OpSymbol() : s_max_(0), s_min_(0), eval_([](int, Half, int) { return HScalar(); }) {}

  OpSymbol(int s_max, std::optional<int> s_min, Eval eval)
      : s_max_(s_max), s_min_(s_min), eval_(std::move(eval)),
        memo_(std::make_shared<std::map<std::tuple<int, int, int>, HScalar>>()) {}

  int s_max() const { return s_max_; }
  std::optional<int> s_min() const { return s_min_; }
  bool has_tail() const { return !s_min_.has_value(); }

  HScalar eval(int s, Half n, int htrunc) const {
    if (s > s_max_ || (s_min_ && s < *s_min_)) return HScalar();
    if (!memo_) return eval_(s, n, htrunc);
    auto key = std::make_tuple(s, n.twice, htrunc);
    auto it = memo_->find(key);
    if (it != memo_->end()) return it->second;
    HScalar r = eval_(s, n, htrunc);
    (*memo_)[key] = r;
    return r;
  }

  // --- constructors -------------------------------------------------------

  static OpSymbol zero() { return OpSymbol(); }

  static OpSymbol term(int s, std::function<HScalar(Half, int)> f) {
    return OpSymbol(s, s, [s, f = std::move(f)](int ss, Half n, int ht) {
      return ss == s ? f(n, ht) : HScalar();
    });
  }

  static OpSymbol identity() {
    return term(0, [](Half, int) { return HScalar(1); });
  }

  // z^k * d/dz^l : shift k-l, eigen n(n-1)...(n-l+1).
  static OpSymbol monomial(int k, int l) {
    return term(k - l, [l](Half n, int) {
      HScalar r(1);
      Rat x = n.as_rat();
      for (int i = 0; i < l; ++i) r *= HScalar(x - Rat(i));
      return r;
    });
  }

  // z^k * p(z d/dz), with p given as its value function on half-integers.
  static OpSymbol euler_poly(int k, std::function<Rat(Rat)> p) {
    return term(k, [p = std::move(p)](Half n, int) { return HScalar(p(n.as_rat())); });
  }

  // e^{c * z d/dz} with val_min(c) >= 1: shift 0, eigen hs_exp(c*n).
  static OpSymbol exp_euler(const HScalar& c) {
    if (!c.is_zero() && c.val_or(1) <= 0)
      fail(ErrorCode::InvalidExponential, "exp-euler generator needs positive hbar-valuation");
    return term(0, [c](Half n, int ht) { return (c.with_trunc(ht) * n.as_rat()).exp(); });
  }

  // Multiplication by a Laurent-tail series: coefficient function e -> HScalar,
  // exactly zero above top_exp, defined for all e <= top_exp.
  static OpSymbol zmul_tail(int top_exp, std::function<HScalar(int, int)> coeff) {
    return OpSymbol(top_exp, std::nullopt,
                    [coeff = std::move(coeff)](int s, Half, int ht) { return coeff(s, ht); });
  }

  // Multiplication by a finite Laurent polynomial given as a ZSeries.
  static OpSymbol zmul(const ZSeries& f) {
    if (!f.window_zero() && f.parity() != Parity::Integer)
      fail(ErrorCode::ParityMismatch, "zmul needs integer exponents");
    std::map<int, HScalar> cs;
    for (const auto& [e, c] : f.terms()) cs[e.as_int()] = c;
    int smax = cs.empty() ? 0 : cs.rbegin()->first;
    int smin = cs.empty() ? 0 : cs.begin()->first;
    return OpSymbol(smax, smin, [cs = std::move(cs)](int s, Half, int) {
      auto it = cs.find(s);
      return it == cs.end() ? HScalar() : it->second;
    });
  }

  // --- algebra ------------------------------------------------------------

  friend OpSymbol op_add(const OpSymbol& a, const OpSymbol& b) {
    std::optional<int> smin;
    if (a.s_min_ && b.s_min_) smin = std::min(*a.s_min_, *b.s_min_);
    return OpSymbol(std::max(a.s_max_, b.s_max_), smin, [a, b](int s, Half n, int ht) {
      return a.eval(s, n, ht) + b.eval(s, n, ht);
    });
  }

  friend OpSymbol op_sub(const OpSymbol& a, const OpSymbol& b) {
    return op_add(a, op_scale(b, HScalar(Rat(-1))));
  }

  friend OpSymbol op_scale(const OpSymbol& a, const HScalar& c) {
    std::optional<int> smin = a.s_min_;
    return OpSymbol(a.s_max_, smin, [a, c](int s, Half n, int ht) { return a.eval(s, n, ht) * c; });
  }

  // (A o B): first B, then A.  z^n -> sum f_A(sa, n+sb) f_B(sb, n) z^{n+sa+sb}.
  friend OpSymbol op_compose(const OpSymbol& a, const OpSymbol& b) {
    std::optional<int> smin;
    if (a.s_min_ && b.s_min_) smin = *a.s_min_ + *b.s_min_;
    int smax = a.s_max_ + b.s_max_;
    return OpSymbol(smax, smin, [a, b](int s, Half n, int ht) {
      HScalar acc;
      int blo = s - a.s_max_;
      if (b.s_min_) blo = std::max(blo, *b.s_min_);
      int bhi = b.s_max_;
      if (a.s_min_) bhi = std::min(bhi, s - *a.s_min_);
      for (int sb = blo; sb <= bhi; ++sb) acc += a.eval(s - sb, n + sb, ht) * b.eval(sb, n, ht);
      return acc;
    });
  }

  friend OpSymbol op_pow(const OpSymbol& a, int e) {
    OpSymbol r = OpSymbol::identity();
    for (int i = 0; i < e; ++i) r = op_compose(r, a);
    return r;
  }

  // Adjoint: fixed by (z^k d^l)* = (-d)^l z^k; per term (s, f(n)) -> (s, f(-n-s-1)).
  friend OpSymbol op_adjoint(const OpSymbol& a) {
    return OpSymbol(a.s_max_, a.s_min_, [a](int s, Half n, int ht) {
      return a.eval(s, Half(-n.twice - 2 * s - 2), ht);
    });
  }

  // iota involution: iota(z^k (z d)^m) = (-z d)^m (-z)^k; per term
  // (s, f(n)) -> (s, (-1)^s f(-n-s)).
  friend OpSymbol op_iota(const OpSymbol& a) {
    return OpSymbol(a.s_max_, a.s_min_, [a](int s, Half n, int ht) {
      HScalar v = a.eval(s, Half(-n.twice - 2 * s), ht);
      return s % 2 == 0 ? v : -v;
    });
  }

  // Anti-symmetrization (A - iota(A)) / 2.
  friend OpSymbol op_antisym(const OpSymbol& a) {
    return op_scale(op_sub(a, op_iota(a)), HScalar(Rat(1, 2)));
  }

  // Conjugation by z^{1/2}: eigen'(n) = eigen(n - 1/2), shifts unchanged.
  friend OpSymbol op_half_conjugate(const OpSymbol& a) {
    return OpSymbol(a.s_max_, a.s_min_, [a](int s, Half n, int ht) {
      return a.eval(s, Half(n.twice - 1), ht);
    });
  }

 private:
  int s_max_;
  std::optional<int> s_min_;
  Eval eval_;
  std::shared_ptr<std::map<std::tuple<int, int, int>, HScalar>> memo_;
};

// Apply to a one-variable series. The exact top of a ZSeries makes this sound
// even for operators with infinite downward tails: contributions with source
// exponent above the input's top vanish identically.
inline ZSeries op_apply(const OpSymbol& A, const ZSeries& x, int htrunc) {
  Half in_lo = x.lo();
  Half in_top = x.top_or_lo();
  ZSeries r(x.parity(), in_lo + A.s_max());
  Half out_top = in_top + A.s_max();
  for (int et = r.lo().twice; et <= out_top.twice; et += 2) {
    Half e(et);
    HScalar acc;
    int s_hi = A.s_max();
    int s_lo = (e - in_top).twice / 2;  // below this, source exponent > top: zero
    if (A.s_min()) s_lo = std::max(s_lo, *A.s_min());
    for (int s = s_lo; s <= s_hi; ++s) {
      Half src = e - s;
      if (src < in_lo) fail(ErrorCode::WindowExhausted, "op_apply source below input window");
      HScalar cx = x.coeff(src);
      if (cx.is_zero() && cx.is_exact()) continue;
      acc += A.eval(s, src, htrunc) * cx;
    }
    r.set(e, acc);
  }
  return r;
}

enum class BiSide { U, V };

// Apply on one variable of a BiSeries. For operators with an infinite tail the
// corresponding exact-top flag is required (otherwise unknown coefficients
// above the window would contribute).
inline BiSeries op_apply(const OpSymbol& A, const BiSeries& x, BiSide side, int htrunc) {
  bool on_u = side == BiSide::U;
  int lo = on_u ? x.ulo() : x.vlo();
  int hi = on_u ? x.uhi() : x.vhi();
  bool top_ex = on_u ? x.utop_exact() : x.vtop_exact();
  if (A.has_tail() && !top_ex)
    fail(ErrorCode::WindowExhausted, "tail operator on a BiSeries without an exact top");
  int out_lo = lo + A.s_max();
  int out_hi = top_ex ? hi + A.s_max() : hi + (A.s_min() ? *A.s_min() : 0);
  if (out_hi < out_lo) fail(ErrorCode::WindowExhausted, "window vanished under operator application");
  BiSeries r(on_u ? out_lo : x.ulo(), on_u ? out_hi : x.uhi(),
             on_u ? x.vlo() : out_lo, on_u ? x.vhi() : out_hi,
             on_u ? top_ex : x.utop_exact(), on_u ? x.vtop_exact() : top_ex);
  int olo = on_u ? x.vlo() : x.ulo();
  int ohi = on_u ? x.vhi() : x.uhi();
  for (int e = out_lo; e <= out_hi; ++e) {
    int s_hi = std::min(A.s_max(), e - lo);
    int s_lo = top_ex ? e - hi : (A.s_min() ? std::max(*A.s_min(), e - hi) : e - hi);
    for (int o = olo; o <= ohi; ++o) {
      HScalar acc;
      for (int s = s_lo; s <= s_hi; ++s) {
        int src = e - s;
        HScalar cx = on_u ? x.at(src, o) : x.at(o, src);
        if (cx.is_zero() && cx.is_exact()) continue;
        acc += A.eval(s, Half::of_int(src), htrunc) * cx;
      }
      if (on_u)
        r.set(e, o, acc);
      else
        r.set(o, e, acc);
    }
  }
  return r;
}

}  // namespace taulift
