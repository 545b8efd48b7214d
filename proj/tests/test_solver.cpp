#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "taulift/solver.hpp"

using namespace taulift;

namespace {

std::mt19937 rng(5150);

ZSeries zconst(const HScalar& c, int lo) {
  ZSeries r(Parity::Integer, Half::of_int(lo));
  r.set(Half::of_int(0), c);
  return r;
}

ZSeries zpoly_z() {
  ZSeries r(Parity::Integer, Half::of_int(0));
  r.set(Half::of_int(1), HScalar(1));
  return r;
}

// z - (h/2) z d/dz, the operator whose square drives the hypergeometric
// one-point recursion below.
OpSymbol bgw_l() {
  return op_sub(OpSymbol::monomial(1, 0),
                op_scale(OpSymbol::monomial(1, 1), HScalar::monomial(rat(1, 2), 1)));
}

}  // namespace

TEST_CASE("one-point recursion: Euler operator pins the constant") {
  ZSeries psi = solve_one_point_qc(OpSymbol::monomial(1, 1), HScalar(7), 6, kTruncInf);
  CHECK(psi.coeff_int(0) == HScalar(7));
  for (int k = 1; k <= 6; ++k) CHECK(psi.coeff_int(-k).is_zero());
}

TEST_CASE("one-point recursion: hypergeometric coefficients") {
  // (l^2 - z l + (h/2) l + h^2/16) Psi = 0, l = z - (h/2) z d,
  // has the normalized solution with [z^{-n}] = (-1)^n ((2n-1)!!)^2 h^n / (2^{3n+1} n!).
  int ht = 12;
  OpSymbol l = bgw_l();
  OpSymbol E = op_add(op_sub(op_compose(l, l), op_compose(OpSymbol::monomial(1, 0), l)),
                      op_add(op_scale(l, HScalar::monomial(rat(1, 2), 1)),
                             op_scale(OpSymbol::identity(), HScalar::monomial(rat(1, 16), 2))));
  ZSeries psi = solve_one_point_qc(E, HScalar(rat(1, 2)), 8, ht);
  for (int n = 0; n <= 8; ++n) {
    Rat df = rat_double_factorial(2 * n - 1);
    Rat want = df * df / (rat_pow(Rat(2), 3 * n + 1) * rat_factorial(n));
    if (n % 2) want = -want;
    CHECK(eq_window(psi.coeff_int(-n), HScalar::monomial(want, n, ht)));
  }
}

TEST_CASE("one-point recursion: cubic curve gives the Airy tail") {
  // l = z - h z^{-2}(z d - 1/2), E = l^2 - z^2; the solution is supported on
  // exponents divisible by 3 with [z^{-3}] = -5/24 h, [z^{-6}] = 385/1152 h^2.
  int ht = 12;
  OpSymbol l = op_add(OpSymbol::monomial(1, 0),
                      OpSymbol::term(-2, [](Half n, int) {
                        return HScalar::monomial(-(n.as_rat() - rat(1, 2)), 1);
                      }));
  OpSymbol E = op_sub(op_compose(l, l), OpSymbol::monomial(2, 0));
  ZSeries psi = solve_one_point_qc(E, HScalar(1), 7, ht);
  CHECK(psi.coeff_int(0) == HScalar(1).with_trunc(ht));
  CHECK(eq_window(psi.coeff_int(-3), HScalar::monomial(rat(-5, 24), 1, ht)));
  CHECK(eq_window(psi.coeff_int(-6), HScalar::monomial(rat(385, 1152), 2, ht)));
  for (int n : {1, 2, 4, 5, 7}) CHECK(psi.coeff_int(-n).is_zero());
}

TEST_CASE("one-point recursion: singular pivot") {
  CHECK_THROWS_WITH_AS((void)solve_one_point_qc(OpSymbol::zero(), HScalar(1), 3, 8),
                       doctest::Contains("SingularPivot"), TauliftError);
}

TEST_CASE("vacuum two-point solves: KP") {
  OpSymbol l = OpSymbol::zmul(zpoly_z());
  ZSeries one = zconst(HScalar(1), -8);
  SolveReportKP rep = solve_two_point_kp(l, one, one, 5, kTruncInf);
  CHECK(rep.order == 5);
  CHECK(rep.cells_checked > 0);
  for (int i = 0; i <= 5; ++i)
    for (int j = 0; i + j <= 5; ++j) CHECK(rep.b.entry(i, j).is_zero());

  BiSeries cand = two_point_assemble(rep.b, -6, 0, -6, 5);
  CHECK(residual_kp(l, one, one, cand, kTruncInf).window_zero());
}

TEST_CASE("vacuum two-point solves: BKP") {
  OpSymbol l = OpSymbol::zmul(zpoly_z());
  ZSeries pb = zconst(HScalar(rat(1, 2)), -8);
  ZSeries pt(Parity::Integer, Half::of_int(-8));
  pt.set(Half::of_int(1), HScalar(-1));
  SolveReportBKP rep = solve_two_point_bkp(l, pb, pt, 5, kTruncInf);
  for (int n = 0; n <= 5; ++n)
    for (int m = 0; n + m <= 5; ++m) CHECK(rep.a.entry(n, m).is_zero());

  BiSeries cand = two_point_assemble(rep.a, -5, 1, -5, 5);
  CHECK(residual_bkp(l, pb, pt, cand, kTruncInf).window_zero());
}

TEST_CASE("perturbed candidates leave a residual") {
  OpSymbol l = OpSymbol::zmul(zpoly_z());
  ZSeries one = zconst(HScalar(1), -8);
  BiSeries cand = two_point_assemble(BogoliubovKP::zeros(6, 6), -6, 0, -6, 5);
  cand.set(-2, -3, cand.at(-2, -3) + HScalar(1));
  BiSeries res = residual_kp(l, one, one, cand, kTruncInf);
  bool hit = false;
  for (int a = res.ulo(); a <= res.uhi() && !hit; ++a)
    for (int b = res.vlo(); b <= res.vhi() && !hit; ++b)
      if (!res.at(a, b).is_zero()) hit = true;
  CHECK(hit);
}

TEST_CASE("inconsistent one-point input is rejected") {
  OpSymbol l = OpSymbol::zmul(zpoly_z());
  ZSeries bad(Parity::Integer, Half::of_int(-8));
  bad.set(Half::of_int(0), HScalar(1));
  bad.set(Half::of_int(-1), HScalar::hbar(10));
  ZSeries one = zconst(HScalar(1).with_trunc(10), -8);
  CHECK_THROWS_WITH_AS((void)solve_two_point_kp(l, bad, one, 4, 10),
                       doctest::Contains("InconsistentData"), TauliftError);
}

TEST_CASE("non-unit pivot is rejected") {
  ZSeries two_z(Parity::Integer, Half::of_int(0));
  two_z.set(Half::of_int(1), HScalar(2));
  ZSeries one = zconst(HScalar(1), -8);
  CHECK_THROWS_WITH_AS((void)solve_two_point_kp(OpSymbol::zmul(two_z), one, one, 3, kTruncInf),
                       doctest::Contains("NotAdmissible"), TauliftError);
}

TEST_CASE("broken antisymmetry is detected") {
  OpSymbol l = OpSymbol::zmul(zpoly_z());
  ZSeries pb(Parity::Integer, Half::of_int(-8));
  pb.set(Half::of_int(0), HScalar(rat(1, 2)));
  pb.set(Half::of_int(-1), HScalar::hbar(10));  // no matching dual data
  ZSeries pt(Parity::Integer, Half::of_int(-8));
  pt.set(Half::of_int(1), HScalar(-1));
  CHECK_THROWS_WITH_AS((void)solve_two_point_bkp(l, pb, pt, 4, 10),
                       doctest::Contains("AntisymmetryViolated"), TauliftError);
}

TEST_CASE("triangular division inverts kernel multiplication") {
  // (u - v) K = 1: dividing the constant 1 back by u - v recovers the kernel.
  BiSeries P(-3, 0, -7, 3, /*utop_exact=*/true, false);
  P.set(0, 0, HScalar(1));
  std::vector<DivTerm> div = {{1, 0, HScalar(1)}, {0, 1, HScalar(Rat(-1))}};
  BiSeries Q = triangular_divide(P, div, -1, -4, -4, 3, kTruncInf);
  CHECK(eq_window(Q, kernel_expand(KernelKind::KP, -4, -1, -4, 3)));
  CHECK(Q.utop_exact());
}

TEST_CASE("triangular division round trip on random data") {
  int ht = 6;
  std::uniform_int_distribution<long> num(-5, 5);
  for (int it = 0; it < 20; ++it) {
    int q_ulo = -5, u_top = -1, vlo_q = -12, vhi_q = 2;
    BiSeries Q(q_ulo, u_top, vlo_q, vhi_q, true, false);
    for (int a = q_ulo; a <= u_top; ++a)
      for (int b = vlo_q; b <= vhi_q; ++b)
        Q.set(a, b, HScalar(rat(num(rng), 1), ht));
    std::vector<DivTerm> div = {{2, 0, HScalar(1) + HScalar::hbar(ht)},
                                {0, 1, HScalar(rat(num(rng), 1), ht)},
                                {1, 2, HScalar(rat(num(rng), 1), ht)}};
    int d = 2, qmax = 2;
    // multiply: P(a,b) = sum_i c_i Q(a - p_i, b - q_i)
    BiSeries P(q_ulo + d, u_top + d, vlo_q + qmax, vhi_q, true, false);
    for (int a = P.ulo(); a <= P.uhi(); ++a)
      for (int b = P.vlo(); b <= P.vhi(); ++b) {
        HScalar acc;
        for (const auto& t : div) acc += t.c * Q.at(a - t.p, b - t.q);
        P.set(a, b, acc);
      }
    BiSeries R = triangular_divide(P, div, u_top, q_ulo, -2, vhi_q, ht);
    CHECK(eq_window(R, Q));
  }
}

TEST_CASE("triangular division error paths") {
  BiSeries P(-2, 1, -4, 2, true, false);
  P.set(0, 0, HScalar(1));
  std::vector<DivTerm> uv = {{1, 0, HScalar(1)}, {0, 1, HScalar(Rat(-1))}};
  CHECK_THROWS_WITH_AS((void)triangular_divide(P, {}, -1, -3, -3, 2, 8),
                       doctest::Contains("BadConfig"), TauliftError);
  CHECK_THROWS_WITH_AS((void)triangular_divide(P, {{1, 1, HScalar(1)}}, -1, -3, -3, 2, 8),
                       doctest::Contains("BadConfig"), TauliftError);
  CHECK_THROWS_WITH_AS(
      (void)triangular_divide(P, {{1, 0, HScalar()}, {0, 1, HScalar(1)}}, -1, -3, -3, 2, 8),
      doctest::Contains("ZeroInverse"), TauliftError);

  BiSeries inexact(-2, 0, -4, 2, false, false);
  inexact.set(0, 0, HScalar(1));
  CHECK_THROWS_WITH_AS((void)triangular_divide(inexact, uv, -1, -3, -3, 2, 8),
                       doctest::Contains("WindowExhausted"), TauliftError);

  BiSeries high(-2, 1, -4, 2, true, false);
  high.set(1, 0, HScalar(1));  // support above the certified quotient top
  CHECK_THROWS_WITH_AS((void)triangular_divide(high, uv, -1, -3, -3, 2, 8),
                       doctest::Contains("InconsistentData"), TauliftError);
}

TEST_CASE("closed B-type two-point of the hypergeometric model") {
  // one-point from the quantum curve, closed quotient, and the recursion all
  // have to agree; spot-check the frozen corner values.
  int ht = 10, N = 6;
  OpSymbol l = bgw_l();
  OpSymbol E = op_add(op_sub(op_compose(l, l), op_compose(OpSymbol::monomial(1, 0), l)),
                      op_add(op_scale(l, HScalar::monomial(rat(1, 2), 1)),
                             op_scale(OpSymbol::identity(), HScalar::monomial(rat(1, 16), 2))));
  ZSeries psi_b = solve_one_point_qc(E, HScalar(rat(1, 2)), 4 * N + 8, ht);
  BiSeries Q = bgw_closed_two_point(l, psi_b, N, ht);
  CHECK(eq_window(Q.at(0, 0), HScalar(rat(1, 2))));
  CHECK(eq_window(Q.at(-1, 1), HScalar(-1)));
  // the affine part is antisymmetric under the dictionary
  BogoliubovBKP a = two_point_disassemble_bkp(Q, N + 1);
  a.check_antisym();
  CHECK(eq_window(a.entry(0, 1), HScalar::monomial(rat(1, 16), 1, ht)));
}
