#include "taulift/solver.hpp"

#include <map>
#include <string>
#include <utility>

namespace taulift {

namespace {

HScalar ev(const OpSymbol& A, int s, int n, int ht) { return A.eval(s, Half::of_int(n), ht); }

std::string cell(int i, int j) {
  return "(" + std::to_string(i) + "," + std::to_string(j) + ")";
}

std::string first_h(const HScalar& x) {
  if (x.terms().empty()) return "";
  return " at hbar^" + std::to_string(x.terms().begin()->first);
}

void check_unit_pivot(const OpSymbol& l, int n_lo, int n_hi, int ht) {
  for (int n = n_lo; n <= n_hi; ++n) {
    HScalar e1 = ev(l, 1, n, ht);
    if (!(e1.coeff(0) == Rat(1)))
      fail(ErrorCode::NotAdmissible,
           "shift-1 eigenvalue is not a unit with constant term 1 at n=" + std::to_string(n));
  }
}

// Coefficient evaluator for the KP master equation
//   (l*_u - l_v)(K + B) - Psi*(u) Psi(v)
// where K is the |u|>|v| expansion of 1/(u-v) and B = sum b_{i,j} u^{-i-1}v^{-j-1}.
// Acting on K is structural: each kernel row has a single u- and v-exponent.
struct KPSystem {
  const OpSymbol& l;
  const OpSymbol& lstar;
  const ZSeries& psi;
  const ZSeries& psi_star;
  std::vector<std::vector<HScalar>>& b;
  int N;
  int ht;

  HScalar B(int x, int y) const {
    if (x > -1 || y > -1) return HScalar();
    int r = -x - 1, c = -y - 1;
    if (r > N || c > N) return HScalar();
    return b[r][c];
  }
  HScalar one_pt(const ZSeries& f, int e) const {
    return e > 0 ? HScalar() : f.coeff_int(e);
  }
  HScalar eq(int a, int bb) const {
    HScalar r;
    if (bb >= 0) r += ev(lstar, a + bb + 1, -bb - 1, ht);  // l*_u on the kernel
    if (a <= -1) r -= ev(l, a + bb + 1, -a - 1, ht);       // -l_v on the kernel
    int shi_u = std::min(lstar.s_max(), a + 1 + N);
    for (int s = a + 1; s <= shi_u; ++s) r += ev(lstar, s, a - s, ht) * B(a - s, bb);
    int shi_v = std::min(l.s_max(), bb + 1 + N);
    for (int s = bb + 1; s <= shi_v; ++s) r -= ev(l, s, bb - s, ht) * B(a, bb - s);
    r -= one_pt(psi_star, a) * one_pt(psi, bb);
    return r;
  }
};

// Same for the BKP master equation
//   (l~_u + l~_v)(K^B + P) - [Psi^B(u)Psi~^B(v) - Psi^B(v)Psi~^B(u)],
// K^B the |u|>|v| expansion of (u-v)/(2(u+v)), P supported on exponents <= 0.
struct BKPSystem {
  const OpSymbol& lt;
  const ZSeries& psi_b;
  const ZSeries& psi_bt;
  std::vector<std::vector<HScalar>>& a;
  int N;
  int ht;

  static Rat sgn(int n) { return n % 2 == 0 ? Rat(1) : Rat(-1); }

  HScalar P(int x, int y) const {
    if (x > 0 || y > 0) return HScalar();
    int n = -x, m = -y;
    if (n > N || m > N) return HScalar();
    if (n == 0 && m == 0) return HScalar();
    if (m == 0) return a[n][0] * sgn(n);
    if (n == 0) return a[m][0] * -sgn(m);
    return a[n][m] * (Rat(2) * sgn(n + m));
  }
  HScalar one_pt(const ZSeries& f, int e, int top) const {
    return e > top ? HScalar() : f.coeff_int(e);
  }
  HScalar eq(int x, int y) const {
    HScalar r;
    // l~_u and l~_v on the kernel rows (0,0) -> 1/2 and (-k,k) -> (-1)^k
    if (y == 0) r += ev(lt, x, 0, ht) * Rat(1, 2);
    if (y > 0) r += ev(lt, x + y, -y, ht) * sgn(y);
    if (x == 0) r += ev(lt, y, 0, ht) * Rat(1, 2);
    if (x < 0) r += ev(lt, x + y, -x, ht) * sgn(x);
    int shi_u = std::min(lt.s_max(), x + N);
    for (int s = x; s <= shi_u; ++s) r += ev(lt, s, x - s, ht) * P(x - s, y);
    int shi_v = std::min(lt.s_max(), y + N);
    for (int s = y; s <= shi_v; ++s) r += ev(lt, s, y - s, ht) * P(x, y - s);
    r -= one_pt(psi_b, x, 0) * one_pt(psi_bt, y, 1) - one_pt(psi_bt, x, 1) * one_pt(psi_b, y, 0);
    return r;
  }
};

}  // namespace

ZSeries solve_one_point_qc(const OpSymbol& E, const HScalar& c0, int N, int ht) {
  // Pivot: largest shift whose eigenvalue at n = -1 is invertible.
  int p = E.s_max() + 1;
  for (int s = E.s_max(); s >= E.s_max() - 64; --s) {
    if (E.s_min() && s < *E.s_min()) break;
    if (!ev(E, s, -1, ht).is_zero()) {
      p = s;
      break;
    }
  }
  if (p > E.s_max())
    fail(ErrorCode::SingularPivot, "no invertible pivot shift in the one-point equation");
  std::vector<HScalar> c(N + 1);
  c[0] = c0.with_trunc(ht);
  for (int k = 1; k <= N; ++k) {
    int e = p - k;
    HScalar acc;
    int s_lo = p - k;
    if (E.s_min()) s_lo = std::max(s_lo, *E.s_min());
    for (int s = s_lo; s <= p - 1; ++s) acc += ev(E, s, e - s, ht) * c[s - e];
    HScalar piv = ev(E, p, -k, ht).with_trunc(ht);
    if (piv.is_zero())
      fail(ErrorCode::SingularPivot, "pivot eigenvalue vanishes at order " + std::to_string(k));
    c[k] = -(acc * piv.inv());
  }
  ZSeries psi(Parity::Integer, Half::of_int(-N));
  for (int k = 0; k <= N; ++k) psi.set(Half::of_int(-k), c[k]);
  // Independent residual check, including shifts above the pivot.
  ZSeries res = op_apply(E, psi, ht);
  for (const auto& [e, v] : res.terms())
    if (!v.is_zero())
      fail(ErrorCode::InconsistentData,
           "one-point residual nonzero at z^" + std::to_string(e.twice / 2));
  return psi;
}

SolveReportKP solve_two_point_kp(const OpSymbol& l, const ZSeries& psi, const ZSeries& psi_star,
                                 int N, int ht) {
  check_unit_pivot(l, -2 * N - 4, 4, ht);
  OpSymbol lstar = op_adjoint(l);
  auto row0 = affine_extract_row0(psi, N + 1);
  std::vector<std::vector<HScalar>> b(N + 1, std::vector<HScalar>(N + 1));
  b[0] = row0;
  KPSystem sys{l, lstar, psi, psi_star, b, N, ht};
  for (int i = 1; i <= N; ++i) {
    HScalar piv = ev(lstar, 1, -i - 1, ht).with_trunc(ht);  // multiplies the unknown b_{i,j}
    if (piv.is_zero()) fail(ErrorCode::SingularPivot, "row pivot vanishes at row " + std::to_string(i));
    HScalar pinv = piv.inv();
    for (int j = 0; j <= N - i; ++j) {
      HScalar c = sys.eq(-i, -j - 1);  // b[i][j] is still zero here
      b[i][j] = -(c * pinv);
    }
  }
  // Verify every equation whose references are solved; includes the b_{i,0}
  // column consistency with Psi* (j = -1 encodes the v^0 column equations).
  SolveReportKP rep;
  rep.order = N;
  rep.b = BogoliubovKP{b};
  for (int i = 0; i <= N; ++i) {
    int jhi = i == 0 ? N - 1 : N - i - 1;
    for (int j = -1; j <= jhi; ++j) {
      HScalar v = sys.eq(-i, j == -1 ? 0 : -j - 1);
      if (!v.is_zero())
        fail(ErrorCode::InconsistentData, "two-point equation fails at " + cell(i, j) + first_h(v) +
                                              " (wrong lifting operator or one-point input)");
      ++rep.cells_checked;
    }
  }
  return rep;
}

BiSeries residual_kp(const OpSymbol& l, const ZSeries& psi, const ZSeries& psi_star,
                     const BiSeries& candidate, int ht) {
  OpSymbol lstar = op_adjoint(l);
  int N = std::max(-candidate.ulo(), -candidate.vlo()) - 1;
  std::vector<std::vector<HScalar>> b(N + 1, std::vector<HScalar>(N + 1));
  for (int r = 0; r <= N; ++r)
    for (int c = 0; c <= N; ++c)
      if (candidate.in_window(-r - 1, -c - 1)) b[r][c] = candidate.at(-r - 1, -c - 1);
  KPSystem sys{l, lstar, psi, psi_star, b, N, ht};
  int su = lstar.s_max(), sv = l.s_max();
  BiSeries out(candidate.ulo() + su, su, candidate.vlo() + sv, sv);
  for (int a = out.ulo(); a <= out.uhi(); ++a)
    for (int bb = out.vlo(); bb <= out.vhi(); ++bb) out.set(a, bb, sys.eq(a, bb));
  return out;
}

SolveReportBKP solve_two_point_bkp(const OpSymbol& ltilde, const ZSeries& psi_b,
                                   const ZSeries& psi_bt, int N, int ht) {
  if (ltilde.has_tail())
    fail(ErrorCode::WindowExhausted, "B-type solver needs a finite symbol");
  check_unit_pivot(ltilde, -2 * N - 4, 4, ht);
  auto [row0, row1] = affine_extract_bkp(psi_b, psi_bt, N + 1);
  std::vector<std::vector<HScalar>> a(N + 1, std::vector<HScalar>(N + 1));
  a[0] = row0;
  a[1] = row1;
  for (int n = 1; n <= N; ++n) a[n][0] = n == 1 ? row1[0] : -row0[n];
  BKPSystem sys{ltilde, psi_b, psi_bt, a, N, ht};
  for (int n = 2; n <= N; ++n) {
    HScalar piv = ev(ltilde, 1, -n, ht).with_trunc(ht);
    if (piv.is_zero()) fail(ErrorCode::SingularPivot, "row pivot vanishes at row " + std::to_string(n));
    HScalar pinv = piv.inv();
    for (int m = 1; m <= N - n; ++m) {
      HScalar c = sys.eq(-n + 1, -m);  // a[n][m] still zero
      a[n][m] = -(c * pinv) * (BKPSystem::sgn(n + m) * Rat(1, 2));
    }
  }
  SolveReportBKP rep;
  rep.order = N;
  rep.a = BogoliubovBKP{a};
  // Anti-symmetry is asserted, not imposed, beyond the extracted rows.
  for (int n = 0; n <= N; ++n)
    for (int m = 0; m <= N - n; ++m)
      if (!eq_window(a[n][m], -a[m][n]))
        fail(ErrorCode::AntisymmetryViolated, "a" + cell(n, m) + " != -a" + cell(m, n));
  for (int n = 0; n <= N; ++n) {
    int mhi = n <= 1 ? N - 1 : N - n;
    for (int m = 0; m <= mhi; ++m) {
      HScalar v = sys.eq(-n + 1, -m);
      if (!v.is_zero())
        fail(ErrorCode::InconsistentData, "B-type equation fails at " + cell(n, m) + first_h(v));
      ++rep.cells_checked;
    }
  }
  return rep;
}

BiSeries residual_bkp(const OpSymbol& ltilde, const ZSeries& psi_b, const ZSeries& psi_bt,
                      const BiSeries& candidate, int ht) {
  int N = std::max(-candidate.ulo(), -candidate.vlo());
  std::vector<std::vector<HScalar>> a(N + 1, std::vector<HScalar>(N + 1));
  // recover a_{n,m} from the affine part of the candidate
  auto sgn = BKPSystem::sgn;
  BiSeries K = kernel_expand(KernelKind::BKP, candidate.ulo(), candidate.uhi(), candidate.vlo(),
                             candidate.vhi());
  for (int n = 1; n <= N; ++n)
    if (candidate.in_window(-n, 0)) a[n][0] = (candidate.at(-n, 0) - K.at(-n, 0)) * sgn(n);
  for (int m = 1; m <= N; ++m)
    if (candidate.in_window(0, -m)) a[0][m] = (candidate.at(0, -m) - K.at(0, -m)) * sgn(m);
  for (int n = 1; n <= N; ++n)
    for (int m = 1; m <= N; ++m)
      if (candidate.in_window(-n, -m))
        a[n][m] = (candidate.at(-n, -m) - K.at(-n, -m)) * (sgn(n + m) * Rat(1, 2));
  BKPSystem sys{ltilde, psi_b, psi_bt, a, N, ht};
  int s = ltilde.s_max();
  BiSeries out(candidate.ulo() + s, s, candidate.vlo() + s, s);
  for (int x = out.ulo(); x <= out.uhi(); ++x)
    for (int y = out.vlo(); y <= out.vhi(); ++y) out.set(x, y, sys.eq(x, y));
  return out;
}

BiSeries triangular_divide(const BiSeries& P, const std::vector<DivTerm>& divisor, int u_top,
                           int q_ulo, int q_vlo, int q_vhi, int ht) {
  if (divisor.empty()) fail(ErrorCode::BadConfig, "empty divisor");
  size_t pivot = 0;
  for (size_t i = 1; i < divisor.size(); ++i)
    if (divisor[i].p > divisor[pivot].p) pivot = i;
  int d = divisor[pivot].p;
  if (divisor[pivot].q != 0) fail(ErrorCode::BadConfig, "divisor pivot must be a pure u-power");
  int qmax = 0;
  for (size_t i = 0; i < divisor.size(); ++i) {
    if (i == pivot) continue;
    if (divisor[i].p >= d || divisor[i].q < 0)
      fail(ErrorCode::BadConfig, "divisor term outside the triangular shape");
    qmax = std::max(qmax, divisor[i].q);
  }
  if (divisor[pivot].c.is_zero()) fail(ErrorCode::ZeroInverse, "divisor pivot coefficient is zero");
  HScalar pinv = divisor[pivot].c.with_trunc(ht).inv();
  if (!P.utop_exact()) fail(ErrorCode::WindowExhausted, "numerator needs an exact u-top");
  // The quotient vanishes above u_top iff the numerator vanishes above u_top+d.
  for (int x = u_top + d + 1; x <= P.uhi(); ++x)
    for (int y = P.vlo(); y <= P.vhi(); ++y)
      if (!P.at(x, y).is_zero())
        fail(ErrorCode::InconsistentData,
             "numerator has support above the certified quotient top at " + cell(x, y));
  std::map<std::pair<int, int>, HScalar> Q;
  for (int alpha = u_top; alpha >= q_ulo; --alpha) {
    int vlo_row = q_vlo - qmax * (alpha - q_ulo);
    for (int beta = q_vhi; beta >= vlo_row; --beta) {
      HScalar val = P.at(alpha + d, beta);
      for (size_t i = 0; i < divisor.size(); ++i) {
        if (i == pivot) continue;
        int aa = alpha + d - divisor[i].p, bb = beta - divisor[i].q;
        if (aa > u_top) continue;  // certified zero
        auto it = Q.find({aa, bb});
        if (it == Q.end())
          fail(ErrorCode::WindowExhausted, "quotient dependency outside computed region");
        val -= divisor[i].c * it->second;
      }
      Q[{alpha, beta}] = val * pinv;
    }
  }
  BiSeries out(q_ulo, u_top, q_vlo, q_vhi, /*utop_exact=*/true, /*vtop_exact=*/false);
  for (int alpha = q_ulo; alpha <= u_top; ++alpha)
    for (int beta = q_vlo; beta <= q_vhi; ++beta) out.set(alpha, beta, Q.at({alpha, beta}));
  return out;
}

namespace {

// Check that the quotient agrees with the pure kernel at non-negative
// v-exponents (the affine part must live at u,v exponents below the kernel).
void check_kernel_tail(const BiSeries& Q, KernelKind kind, int v_from) {
  BiSeries K = kernel_expand(kind, Q.ulo(), Q.uhi(), Q.vlo(), Q.vhi());
  for (int a = Q.ulo(); a <= Q.uhi(); ++a)
    for (int b = v_from; b <= Q.vhi(); ++b)
      if (!eq_window(Q.at(a, b), K.at(a, b)))
        fail(ErrorCode::InconsistentData,
             "closed-form two-point has non-kernel support at " + cell(a, b));
}

}  // namespace

BiSeries rspin_closed_two_point(const OpSymbol& l, int r, const ZSeries& psi,
                                const ZSeries& psi_star, int N, int ht) {
  OpSymbol lstar = op_adjoint(l);
  int q_ulo = -N - 1, q_vlo = -N - 1, q_vhi = r;
  int ulo_sep = q_ulo + 1 - r;                          // so u coverage reaches q_ulo + r
  int vlo_sep = q_vlo - r * (-1 - q_ulo) - r - q_vhi;   // division dependency depth
  ZSeries pu = psi_star.truncated(Half::of_int(ulo_sep));
  ZSeries pv = psi.truncated(Half::of_int(vlo_sep));
  BiSeries sep = bs_separable_product(pu, pv, ulo_sep, 0, vlo_sep, 0);
  BiSeries num;
  for (int a = 0; a <= r - 1; ++a) {
    BiSeries t = op_apply(op_pow(lstar, a), sep, BiSide::U, ht);
    t = op_apply(op_pow(l, r - 1 - a), t, BiSide::V, ht);
    num = a == 0 ? t : num + t;
  }
  std::vector<DivTerm> div = {{r, 0, HScalar(1)}, {0, r, HScalar(Rat(-1))}};
  BiSeries Q = triangular_divide(num, div, /*u_top=*/-1, q_ulo, q_vlo, q_vhi, ht);
  check_kernel_tail(Q, KernelKind::KP, 0);
  return Q;
}

BiSeries gkm_closed_two_point(const OpSymbol& l, const std::vector<Rat>& x_poly,
                              const ZSeries& psi, const ZSeries& psi_star, int N, int ht) {
  int d = static_cast<int>(x_poly.size()) - 1;
  while (d > 0 && x_poly[d] == 0) --d;
  if (d < 1) fail(ErrorCode::BadParams, "potential derivative must be non-constant");
  OpSymbol lstar = op_adjoint(l);
  int q_ulo = -N - 1, q_vlo = -N - 1, q_vhi = d;
  int ulo_sep = q_ulo + 1 - d;
  int vlo_sep = q_vlo - d * (-1 - q_ulo) - d - q_vhi;
  BiSeries sep = bs_separable_product(psi_star.truncated(Half::of_int(ulo_sep)),
                                      psi.truncated(Half::of_int(vlo_sep)), ulo_sep, 0, vlo_sep, 0);
  // W(l*_u, l_v) = sum_k x_k sum_{i+j=k-1} (l*_u)^i (l_v)^j
  BiSeries num;
  bool first = true;
  for (int k = 1; k <= d; ++k) {
    if (x_poly[k] == 0) continue;
    for (int i = 0; i <= k - 1; ++i) {
      BiSeries t = op_apply(op_pow(lstar, i), sep, BiSide::U, ht);
      t = op_apply(op_pow(l, k - 1 - i), t, BiSide::V, ht);
      t = t.scaled(HScalar(x_poly[k]));
      num = first ? t : num + t;
      first = false;
    }
  }
  std::vector<DivTerm> div;
  for (int k = 1; k <= d; ++k) {
    if (x_poly[k] == 0) continue;
    div.push_back({k, 0, HScalar(x_poly[k])});
    div.push_back({0, k, HScalar(-x_poly[k])});
  }
  BiSeries Q = triangular_divide(num, div, /*u_top=*/-1, q_ulo, q_vlo, q_vhi, ht);
  check_kernel_tail(Q, KernelKind::KP, 0);
  return Q;
}

BiSeries bgw_closed_two_point(const OpSymbol& l, const ZSeries& psi_b, int N, int ht) {
  int q_ulo = -N, q_vlo = -N, q_vhi = 1;
  int ulo_sep = q_ulo - 1;
  int vlo_sep = q_vlo - (0 - q_ulo) - 1 - q_vhi;
  ZSeries pu = psi_b.truncated(Half::of_int(ulo_sep));
  ZSeries pv = psi_b.truncated(Half::of_int(vlo_sep));
  BiSeries sep = bs_separable_product(pu, pv, ulo_sep, 0, vlo_sep, 0);
  OpSymbol zmul1 = OpSymbol::monomial(1, 0);
  BiSeries num = op_apply(l, sep, BiSide::U, ht).scaled(HScalar(4));
  num = num - op_apply(l, sep, BiSide::V, ht).scaled(HScalar(4));
  num = num - op_apply(zmul1, sep, BiSide::U, ht).scaled(HScalar(2));
  num = num + op_apply(zmul1, sep, BiSide::V, ht).scaled(HScalar(2));
  std::vector<DivTerm> div = {{1, 0, HScalar(1)}, {0, 1, HScalar(1)}};
  BiSeries Q = triangular_divide(num, div, /*u_top=*/0, q_ulo, q_vlo, q_vhi, ht);
  check_kernel_tail(Q, KernelKind::BKP, 1);
  return Q;
}

}  // namespace taulift
