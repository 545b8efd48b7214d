#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "taulift/biseries.hpp"
#include "taulift/opsymbol.hpp"
#include "taulift/serialize.hpp"
#include "taulift/zseries.hpp"

using namespace taulift;

namespace {

ZSeries zmono(Half e, const HScalar& c, Half lo) {
  ZSeries r(parity_of(e), lo);
  r.set(e, c);
  return r;
}

ZSeries zpoly_z() {  // the polynomial z
  ZSeries r(Parity::Integer, Half::of_int(0));
  r.set(Half::of_int(1), HScalar(1));
  return r;
}

std::mt19937 rng(911);

ZSeries random_zseries(Half lo, int top, int ht) {
  ZSeries r(Parity::Integer, lo);
  std::uniform_int_distribution<long> num(-5, 5);
  for (int e = lo.as_int(); e <= top; ++e)
    r.set(Half::of_int(e), HScalar(rat(num(rng), 1), ht));
  return r;
}

}  // namespace

TEST_CASE("zseries window bookkeeping") {
  ZSeries a(Parity::Integer, Half::of_int(-3));
  a.set(Half::of_int(-5), HScalar(7));  // below the floor: silently dropped
  CHECK(a.window_zero());
  a.set(Half::of_int(2), HScalar(3));
  CHECK(a.coeff_int(2) == HScalar(3));
  CHECK(a.coeff_int(-3).is_zero());
  CHECK_THROWS_WITH_AS((void)a.coeff_int(-4), doctest::Contains("WindowExhausted"), TauliftError);
  CHECK(a.top()->as_int() == 2);
  CHECK_THROWS_WITH_AS(a.set(Half::half_odd(0), HScalar(1)), doctest::Contains("ParityMismatch"),
                       TauliftError);

  // a stored inexact zero still counts as unknown-but-tracked, not as absent
  ZSeries b(Parity::Integer, Half::of_int(0));
  b.set(Half::of_int(1), HScalar::zero(4));
  CHECK(b.window_zero());
  CHECK(b.top()->as_int() == 1);
  CHECK(!b.terms().empty());
}

TEST_CASE("zseries arithmetic") {
  ZSeries a = zmono(Half::of_int(1), HScalar(2), Half::of_int(-2));
  ZSeries b = zmono(Half::of_int(-1), HScalar(3), Half::of_int(-4));
  ZSeries s = a + b;
  CHECK(s.lo().as_int() == -2);
  CHECK(s.coeff_int(1) == HScalar(2));
  CHECK(s.coeff_int(-1) == HScalar(3));
  CHECK((a - a).window_zero());

  ZSeries p = a * b;
  CHECK(p.coeff_int(0) == HScalar(6));
  // product floor: unknown tail of one factor meets the top of the other
  CHECK(p.lo() == std::max(a.lo() + *b.top(), b.lo() + *a.top()));

  ZSeries half = zmono(Half::half_odd(0), HScalar(1), Half::half_odd(-3));
  CHECK_THROWS_AS((void)(a + half), TauliftError);
  CHECK((half * half).parity() == Parity::Integer);
  CHECK((half * half).coeff_int(1) == HScalar(1));
  CHECK(a.shifted(Half::half_odd(0)).parity() == Parity::HalfOdd);
  CHECK(a.scaled(HScalar(5)).coeff_int(1) == HScalar(10));
  CHECK(a.truncated(Half::of_int(0)).lo().as_int() == 0);
}

TEST_CASE("kp kernel expansion") {
  BiSeries k = kernel_expand(KernelKind::KP, -6, 0, -6, 5);
  CHECK(k.at(-1, 0) == HScalar(1));
  CHECK(k.at(-3, 2) == HScalar(1));
  CHECK(k.at(-2, 2).is_zero());
  CHECK(k.at(-1, -1).is_zero());
  CHECK(k.utop_exact());

  // (u - v) K = 1 on the interior of the window
  OpSymbol mu = OpSymbol::zmul(zpoly_z());
  BiSeries uk = op_apply(mu, k, BiSide::U, kTruncInf);
  BiSeries vk = op_apply(mu, k, BiSide::V, kTruncInf);
  BiSeries d = uk - vk;
  for (int a = d.ulo(); a <= d.uhi(); ++a)
    for (int b = d.vlo(); b <= d.vhi(); ++b)
      CHECK(d.at(a, b) == (a == 0 && b == 0 ? HScalar(1) : HScalar()));
}

TEST_CASE("bkp kernel expansion") {
  BiSeries k = kernel_expand(KernelKind::BKP, -6, 1, -6, 6);
  CHECK(k.at(0, 0) == HScalar(rat(1, 2)));
  CHECK(k.at(-1, 1) == HScalar(-1));
  CHECK(k.at(-2, 2) == HScalar(1));
  CHECK(k.at(-1, 2).is_zero());

  // (u + v) K^B = (u - v) / 2 on the interior
  OpSymbol mu = OpSymbol::zmul(zpoly_z());
  BiSeries s = op_apply(mu, k, BiSide::U, kTruncInf) + op_apply(mu, k, BiSide::V, kTruncInf);
  for (int a = s.ulo(); a <= s.uhi(); ++a)
    for (int b = s.vlo(); b <= s.vhi(); ++b) {
      HScalar want;
      if (a == 1 && b == 0) want = HScalar(rat(1, 2));
      if (a == 0 && b == 1) want = HScalar(rat(-1, 2));
      CHECK(s.at(a, b) == want);
    }
}

TEST_CASE("biseries window semantics") {
  BiSeries x(-2, 0, -1, 3, true, false);
  x.set(0, 3, HScalar(4));
  CHECK(x.at(0, 3) == HScalar(4));
  CHECK(x.known(5, 0));       // u-top is certified exact
  CHECK(x.at(5, 0).is_zero());
  CHECK(!x.known(0, 4));      // v-top is not
  CHECK_THROWS_WITH_AS((void)x.at(0, 4), doctest::Contains("WindowExhausted"), TauliftError);
  CHECK_THROWS_AS(x.set(0, 4, HScalar(1)), TauliftError);
  x.set(3, 0, HScalar());     // writing zero into the exactly-zero region is allowed
  x.add_at(0, 9, HScalar(5)); // out-of-window contributions are dropped
  BiSeries r = x.restricted(-1, 0, 0, 2);
  CHECK(r.at(0, 0).is_zero());
  CHECK(r.utop_exact());  // the restriction keeps the certified u-top
  CHECK(!x.restricted(-2, -1, 0, 2).utop_exact());
  CHECK_THROWS_AS((void)BiSeries(0, -1, 0, 0), TauliftError);
}

TEST_CASE("biseries addition intersects certified regions") {
  BiSeries a(-3, 0, -3, 2, true, false);
  a.set(0, 2, HScalar(1));
  BiSeries b(-2, 4, -2, 0, false, true);
  b.set(-2, 0, HScalar(5));
  BiSeries s = a + b;
  CHECK(s.ulo() == -2);
  CHECK(s.uhi() == 4);  // a's certified u-top extends it over b's window
  CHECK(s.vhi() == 2);  // b's certified v-top extends it over a's window
  CHECK(!s.utop_exact());
  CHECK(!s.vtop_exact());
  CHECK(s.at(-2, 0) == HScalar(5));
  CHECK(s.at(0, 2) == HScalar(1));
  CHECK(s.at(0, 0).is_zero());
}

TEST_CASE("separable product") {
  ZSeries fu(Parity::Integer, Half::of_int(-4));
  fu.set(Half::of_int(0), HScalar(1));
  fu.set(Half::of_int(-1), HScalar::monomial(Rat(-1), -1));  // -1/hbar at u^{-1}
  ZSeries gv(Parity::Integer, Half::of_int(-4));
  gv.set(Half::of_int(0), HScalar(1));
  gv.set(Half::of_int(-1), HScalar::monomial(Rat(1), -1));   // 1/hbar at v^{-1}
  BiSeries p = bs_separable_product(fu, gv, -4, 0, -4, 0);
  CHECK(p.at(-1, -1) == HScalar::monomial(Rat(-1), -2));
  CHECK(p.at(0, 0) == HScalar(1));
  CHECK(p.utop_exact());
  CHECK(p.vtop_exact());
  BiSeries q = bs_separable_product(fu, gv, -4, -1, -4, 0);
  CHECK(!q.utop_exact());
  CHECK_THROWS_WITH_AS((void)bs_separable_product(fu, gv, -5, 0, -4, 0),
                       doctest::Contains("WindowExhausted"), TauliftError);
}

TEST_CASE("eq_window compares common region only") {
  ZSeries a = random_zseries(Half::of_int(-5), 2, 8);
  ZSeries b = a.truncated(Half::of_int(-3));
  CHECK(eq_window(a, b));
  ZSeries c = b;
  c.set(Half::of_int(0), b.coeff_int(0) + HScalar(1));
  CHECK(!eq_window(a, c));

  BiSeries x = bs_separable_product(a, b, -3, 2, -3, 2);
  BiSeries y = x.restricted(-2, 1, -2, 1);
  CHECK(eq_window(x, y));
}

TEST_CASE("serialization is deterministic and schema-stable") {
  ZSeries a = random_zseries(Half::of_int(-4), 1, 6);
  CHECK(json_zseries("z", a) == json_zseries("z", a));
  CHECK(csv_zseries(a) == csv_zseries(a));
  CHECK(csv_zseries(a).substr(0, 18) == "i,j,h_exp,num,den\n");

  BiSeries x = bs_separable_product(a, a, -3, 1, -3, 1);
  std::string j = json_biseries("uv", x);
  CHECK(j == json_biseries("uv", x));
  CHECK(j.find("\"var\": \"uv\"") != std::string::npos);
  CHECK(j.find("\"window\"") != std::string::npos);
  CHECK(csv_biseries(x).substr(0, 18) == "i,j,h_exp,num,den\n");

  // rationals are serialized as decimal strings
  ZSeries big(Parity::Integer, Half::of_int(0));
  big.set(Half::of_int(0), HScalar(rat(1, 3)));
  CHECK(csv_zseries(big) == "i,j,h_exp,num,den\n0,0,0,1,3\n");
}
