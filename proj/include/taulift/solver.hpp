#pragma once

#include <vector>

#include "taulift/biseries.hpp"
#include "taulift/fock.hpp"
#include "taulift/opsymbol.hpp"
#include "taulift/zseries.hpp"

namespace taulift {

struct SolveReportKP {
  BogoliubovKP b;        // triangle i+j <= N solved
  int order = 0;         // N
  int cells_checked = 0; // equations verified identically zero
};

struct SolveReportBKP {
  BogoliubovBKP a;
  int order = 0;
  int cells_checked = 0;
};

// Unique normalized solution Psi = c0 + O(z^{-1}) of E.Psi = 0, as a triangular
// coefficient recursion on the pivot shift (the largest shift whose eigen is an
// invertible HScalar). The residual is re-checked independently on the window.
ZSeries solve_one_point_qc(const OpSymbol& E, const HScalar& c0, int N, int ht);

// Order-by-order solution of (l*_u - l_v) Psi(u,v) = Psi*(u) Psi(v) in the
// space kernel + sum b_{i,j} u^{-i-1} v^{-j-1}. Row 0 comes from Psi; the
// column b_{i,0} and all remaining equations are consistency checks.
SolveReportKP solve_two_point_kp(const OpSymbol& l, const ZSeries& psi, const ZSeries& psi_star,
                                 int N, int ht);

// Residual of the KP equation for a candidate of the form kernel + affine tail
// (coefficients at u^{-i-1}v^{-j-1} only, besides the kernel).
BiSeries residual_kp(const OpSymbol& l, const ZSeries& psi, const ZSeries& psi_star,
                     const BiSeries& candidate, int ht);

// BKP analog: (l~_u + l~_v) Psi^B(u,v) = Psi^B(u)Psi~^B(v) - Psi^B(v)Psi~^B(u),
// candidate = BKP kernel + P with P supported on u,v exponents <= 0.
SolveReportBKP solve_two_point_bkp(const OpSymbol& ltilde, const ZSeries& psi_b,
                                   const ZSeries& psi_bt, int N, int ht);
BiSeries residual_bkp(const OpSymbol& ltilde, const ZSeries& psi_b, const ZSeries& psi_bt,
                      const BiSeries& candidate, int ht);

struct DivTerm {
  int p, q;
  HScalar c;
};

// Solve Q * D = P where D = sum c_{p,q} u^p v^q has a unique maximal-u term
// (d, 0) and all other terms have p < d, q >= 0. Q is certified zero above
// u_top; P must have an exact u-top. Expansion convention |u| > |v|.
BiSeries triangular_divide(const BiSeries& P, const std::vector<DivTerm>& divisor, int u_top,
                           int q_ulo, int q_vlo, int q_vhi, int ht);

// Closed two-point evaluators.
// sum_{a=0}^{r-1} (l*_u)^a (l_v)^{r-1-a} Psi*(u)Psi(v) / (u^r - v^r).
BiSeries rspin_closed_two_point(const OpSymbol& l, int r, const ZSeries& psi,
                                const ZSeries& psi_star, int N, int ht);
// W(l*_u, l_v) Psi*(u)Psi(v) / (x(u) - x(v)), W(a,b) = (x(a)-x(b))/(a-b),
// x an hbar-free polynomial given by coefficients x_poly[k] of z^k.
BiSeries gkm_closed_two_point(const OpSymbol& l, const std::vector<Rat>& x_poly,
                              const ZSeries& psi, const ZSeries& psi_star, int N, int ht);
// -2(-2 l_u + 2 l_v + u - v) Psi^B(u)Psi^B(v) / (hbar (u + v)).
BiSeries bgw_closed_two_point(const OpSymbol& l, const ZSeries& psi_b, int N, int ht);

}  // namespace taulift
