#include "taulift/fock.hpp"

#include <algorithm>
#include <cstdint>
#include <set>

namespace taulift {

void BogoliubovBKP::check_antisym() const {
  for (int n = 0; n < size(); ++n)
    for (int m = 0; m <= n; ++m)
      if (!eq_window(a[n][m], -a[m][n]))
        fail(ErrorCode::AntisymmetryViolated, "a[" + std::to_string(n) + "][" + std::to_string(m) +
                                                  "] != -a[" + std::to_string(m) + "][" +
                                                  std::to_string(n) + "]");
}

namespace {

bool is_charged(LabelKind k) {
  return k == LabelKind::Psi || k == LabelKind::PsiStar || k == LabelKind::PsiField ||
         k == LabelKind::PsiStarField;
}

// Neutral vacuum pair value <0|phi_i phi_j|0>: nonzero only for i = -j <= 0;
// 1/2 at (0,0), (-1)^j for -i = j > 0. The sign is forced by the anticommutator
// [phi_i, phi_j]_+ = (-1)^i delta_{i+j,0} and confirmed against the B-type
// one-point expansions (see tests).
Rat neutral_vac(int i, int j) {
  if (i + j != 0 || i > 0) return Rat(0);
  if (i == 0) return Rat(1, 2);
  return j % 2 == 0 ? Rat(1) : Rat(-1);
}

// Ordered-pair contraction <0| x y e^A |0> (normalized).
MultiSeries contract(const FLabel& x, const FLabel& y, const WickState& st, const WickOpts& o) {
  MultiSeries r;
  const BogoliubovKP* B = st.kp;
  const BogoliubovBKP* A = st.bkp;
  auto bent = [&](int k, int i) { return B ? B->entry(k, i) : HScalar(); };
  auto aent = [&](int n, int m) { return A ? A->entry(n, m) : HScalar(); };
  int rows = B ? B->rows() : 0, cols = B ? B->cols() : 0, asz = A ? A->size() : 0;

  switch (x.kind) {
    case LabelKind::PsiStar: {
      Half a = x.mode;
      if (y.kind == LabelKind::Psi) {
        Half b = y.mode;
        if (a == b && a.twice > 0) r.add(0, 0, HScalar(1));
        if (a.twice > 0 && b.twice < 0) r.add(0, 0, bent((a.twice - 1) / 2, (-b.twice - 1) / 2));
      } else if (y.kind == LabelKind::PsiField) {
        // <psi*_a psi(x)> = [a>0] (x^{a-1/2} + sum_i b(a-1/2,i) x^{-i-1})
        if (a.twice > 0) {
          int k = (a.twice - 1) / 2;
          auto add = [&](int e, const HScalar& c) {
            if (y.var == 0)
              r.add(e, 0, c);
            else
              r.add(0, e, c);
          };
          add(k, HScalar(1));
          for (int i = 0; i < cols; ++i) add(-i - 1, bent(k, i));
        }
      }
      break;
    }
    case LabelKind::Psi: {
      Half a = x.mode;
      if (y.kind == LabelKind::PsiStar) {
        Half b = y.mode;
        if (a == b && a.twice < 0) r.add(0, 0, HScalar(1));
        if (a.twice < 0 && b.twice > 0) r.add(0, 0, -bent((b.twice - 1) / 2, (-a.twice - 1) / 2));
      } else if (y.kind == LabelKind::PsiStarField) {
        // <psi_a psi*(x)> = [a<0] (x^{-a-1/2} - sum_k b(k,-a-1/2) x^{-k-1})
        if (a.twice < 0) {
          int i = (-a.twice - 1) / 2;
          auto add = [&](int e, const HScalar& c) {
            if (y.var == 0)
              r.add(e, 0, c);
            else
              r.add(0, e, c);
          };
          add(i, HScalar(1));
          for (int k = 0; k < rows; ++k) add(-k - 1, -bent(k, i));
        }
      }
      break;
    }
    case LabelKind::PsiStarField: {
      if (y.kind == LabelKind::Psi) {
        // <psi*(x) psi_b> = [b>0] x^{-b-1/2} + [b<0] sum_k b(k,-b-1/2) x^{-k-1}
        Half b = y.mode;
        auto add = [&](int e, const HScalar& c) {
          if (x.var == 0)
            r.add(e, 0, c);
          else
            r.add(0, e, c);
        };
        if (b.twice > 0) add((-b.twice - 1) / 2, HScalar(1));
        if (b.twice < 0)
          for (int k = 0; k < rows; ++k) add(-k - 1, bent(k, (-b.twice - 1) / 2));
      } else if (y.kind == LabelKind::PsiField) {
        // <psi*(x) psi(y)> = kernel + sum b_{k,i} x^{-k-1} y^{-i-1}
        int lo = std::min(o.ulo, o.vlo);
        for (int k = 0; -k - 1 >= lo; ++k) r.add(-k - 1, k, HScalar(1));
        for (int k = 0; k < rows; ++k)
          for (int i = 0; i < cols; ++i) r.add(-k - 1, -i - 1, bent(k, i));
        if (x.var != 0 || y.var != 1)
          fail(ErrorCode::BadConfig, "field contraction expects u before v");
      }
      break;
    }
    case LabelKind::PsiField: {
      if (y.kind == LabelKind::PsiStar) {
        // <psi(x) psi*_b> = [b<0] x^{b-1/2} - [b>0] sum_i b(b-1/2,i) x^{-i-1}
        Half b = y.mode;
        auto add = [&](int e, const HScalar& c) {
          if (x.var == 0)
            r.add(e, 0, c);
          else
            r.add(0, e, c);
        };
        if (b.twice < 0) add((b.twice - 1) / 2, HScalar(1));
        if (b.twice > 0)
          for (int i = 0; i < cols; ++i) add(-i - 1, -bent((b.twice - 1) / 2, i));
      } else if (y.kind == LabelKind::PsiStarField) {
        // <psi(x) psi*(y)> = kernel - sum b_{k,i} x^{-i-1} y^{-k-1}
        int lo = std::min(o.ulo, o.vlo);
        for (int k = 0; -k - 1 >= lo; ++k) r.add(-k - 1, k, HScalar(1));
        for (int k = 0; k < rows; ++k)
          for (int i = 0; i < cols; ++i) r.add(-i - 1, -k - 1, -bent(k, i));
        if (x.var != 0 || y.var != 1)
          fail(ErrorCode::BadConfig, "field contraction expects u before v");
      }
      break;
    }
    case LabelKind::Phi: {
      int i = x.mode.as_int();
      if (y.kind == LabelKind::Phi) {
        int j = y.mode.as_int();
        r.add(0, 0, HScalar(neutral_vac(i, j)));
        if (i <= 0 && j <= 0 && A)
          r.add(0, 0, aent(-i, -j) * (Rat(2) * neutral_vac(i, -i) * neutral_vac(j, -j)));
      } else if (y.kind == LabelKind::PhiField) {
        auto add = [&](int e, const HScalar& c) {
          if (y.var == 0)
            r.add(e, 0, c);
          else
            r.add(0, e, c);
        };
        if (i <= 0) {
          add(-i, HScalar(neutral_vac(i, -i)));
          for (int m = 0; m < asz; ++m)
            add(-m, aent(-i, m) * (Rat(2) * neutral_vac(i, -i) * neutral_vac(-m, m)));
        }
      }
      break;
    }
    case LabelKind::PhiField: {
      auto addx = [&](int e, int e2, const HScalar& c) {
        if (x.var == 0)
          r.add(e, e2, c);
        else
          r.add(e2, e, c);
      };
      if (y.kind == LabelKind::Phi) {
        int j = y.mode.as_int();
        // sum_i x^i <phi_i phi_j>
        addx(-j, 0, HScalar(neutral_vac(-j, j)));
        if (j <= 0)
          for (int n = 0; n < asz; ++n)
            addx(-n, 0, aent(n, -j) * (Rat(2) * neutral_vac(-n, n) * neutral_vac(j, -j)));
      } else if (y.kind == LabelKind::PhiField) {
        if (x.var != 0 || y.var != 1)
          fail(ErrorCode::BadConfig, "field contraction expects u before v");
        int lo = std::min(o.ulo, o.vlo);
        r.add(0, 0, HScalar(Rat(1, 2)));
        for (int n = 1; -n >= lo; ++n) r.add(-n, n, HScalar(neutral_vac(-n, n)));
        for (int n = 0; n < asz; ++n)
          for (int m = 0; m < asz; ++m)
            r.add(-n, -m, aent(n, m) * (Rat(2) * neutral_vac(-n, n) * neutral_vac(-m, m)));
      }
      break;
    }
  }
  return r;
}

MultiSeries wick_rec(std::vector<FLabel>& rem, const WickState& st, const WickOpts& o) {
  if (rem.empty()) return MultiSeries::scalar(HScalar(1));
  MultiSeries total;
  FLabel first = rem.front();
  for (size_t p = 1; p < rem.size(); ++p) {
    MultiSeries pair = contract(first, rem[p], st, o);
    if (pair.c.empty()) continue;
    std::vector<FLabel> rest;
    rest.reserve(rem.size() - 2);
    for (size_t q = 1; q < rem.size(); ++q)
      if (q != p) rest.push_back(rem[q]);
    MultiSeries sub = wick_rec(rest, st, o);
    Rat sign = (p % 2 == 1) ? Rat(1) : Rat(-1);  // move partner left past p-1 letters
    total = total + (pair * sub).scaled(sign);
  }
  return total;
}

}  // namespace

MultiSeries wick_vev(const FermionWord& word, const WickState& state, const WickOpts& opts) {
  bool any_charged = false, any_neutral = false;
  int charge = 0;
  for (const auto& l : word) {
    if (is_charged(l.kind))
      any_charged = true;
    else
      any_neutral = true;
    if (l.kind == LabelKind::Psi || l.kind == LabelKind::PsiField) ++charge;
    if (l.kind == LabelKind::PsiStar || l.kind == LabelKind::PsiStarField) --charge;
  }
  if (any_charged && any_neutral)
    fail(ErrorCode::MixedStatistics, "charged and neutral labels in one word");
  if (any_charged && charge != 0)
    fail(ErrorCode::UnbalancedCharge, "word has unequal psi / psi* counts");
  if (word.size() % 2 != 0) {
    if (any_charged) fail(ErrorCode::UnbalancedCharge, "odd-length charged word");
    return MultiSeries();  // neutral odd word: zero
  }
  std::vector<FLabel> rem = word;
  return wick_rec(rem, state, opts);
}

HScalar wick_vev_scalar(const FermionWord& word, const WickState& state, int ht) {
  WickOpts o;
  o.ht = ht;
  return wick_vev(word, state, o).as_scalar().with_trunc(ht);
}

namespace {

// ---- charged oracle ----------------------------------------------------

HScalar charged_oracle(const FermionWord& word, const BogoliubovKP* B, int ht) {
  // Mode universe: word modes plus modes touched by A.
  std::set<int> modes;  // stored as Half.twice
  for (const auto& l : word) modes.insert(l.mode.twice);
  struct AEntry {
    int create_star;  // psi*_{-i-1/2}: twice = -2i-1
    int create_psi;   // psi_{k+1/2}: twice = 2k+1
    HScalar c;
  };
  std::vector<AEntry> aentries;
  if (B)
    for (int k = 0; k < B->rows(); ++k)
      for (int i = 0; i < B->cols(); ++i) {
        HScalar c = B->entry(k, i);
        if (c.is_zero() && c.is_exact()) continue;
        aentries.push_back({-2 * i - 1, 2 * k + 1, c});
        modes.insert(-2 * i - 1);
        modes.insert(2 * k + 1);
      }
  if (modes.size() > 24) fail(ErrorCode::SupportTooLarge, "oracle mode support too large");
  std::vector<int> slot_modes(modes.begin(), modes.end());  // ascending
  auto slot_of = [&](int tw) {
    return static_cast<int>(std::lower_bound(slot_modes.begin(), slot_modes.end(), tw) -
                            slot_modes.begin());
  };

  using State = std::map<uint32_t, HScalar>;
  auto apply_creator = [&](const State& s, int slot) {
    State r;
    for (const auto& [m, c] : s) {
      if (m & (1u << slot)) continue;
      int below = __builtin_popcount(m & ((1u << slot) - 1));
      HScalar v = below % 2 ? -c : c;
      r[m | (1u << slot)] += v;
    }
    return r;
  };
  auto apply_annihilator = [&](const State& s, int slot) {
    State r;
    for (const auto& [m, c] : s) {
      if (!(m & (1u << slot))) continue;
      int below = __builtin_popcount(m & ((1u << slot) - 1));
      HScalar v = below % 2 ? -c : c;
      r[m & ~(1u << slot)] += v;
    }
    return r;
  };
  // psi_k: k>0 creator, k<0 annihilator of slot(k).
  // psi*_k: k<0 creator, k>0 annihilator of slot(k).
  auto apply_label = [&](const State& s, const FLabel& l) {
    int tw = l.mode.twice;
    bool creator = (l.kind == LabelKind::Psi) ? tw > 0 : tw < 0;
    return creator ? apply_creator(s, slot_of(tw)) : apply_annihilator(s, slot_of(tw));
  };

  State st;
  st[0] = HScalar(Rat(1), ht);
  // e^A expanded to nilpotency.
  State acc = st;
  State power = st;
  Rat fact(1);
  for (int m = 1; m <= static_cast<int>(slot_modes.size()); ++m) {
    // power <- A * power
    State next;
    for (const auto& e : aentries) {
      State t = apply_creator(power, slot_of(e.create_psi));
      t = apply_creator(t, slot_of(e.create_star));
      for (auto& [mask, c] : t) next[mask] += c * e.c;
    }
    power = std::move(next);
    if (power.empty()) break;
    fact *= Rat(m);
    for (const auto& [mask, c] : power) acc[mask] += c * (Rat(1) / fact);
  }
  // apply word right-to-left
  State cur = std::move(acc);
  for (auto it = word.rbegin(); it != word.rend(); ++it) cur = apply_label(cur, *it);
  auto it = cur.find(0);
  HScalar num = it == cur.end() ? HScalar(Rat(0), ht) : it->second;
  return num.with_trunc(ht);  // <0|e^A|0> = 1 for pure creation A
}

// ---- neutral oracle ----------------------------------------------------

HScalar neutral_oracle(const FermionWord& word, const BogoliubovBKP* A, int ht) {
  int maxmode = 0;
  for (const auto& l : word) maxmode = std::max(maxmode, std::abs(l.mode.as_int()));
  if (A) maxmode = std::max(maxmode, A->size() - 1);
  if (maxmode > 20) fail(ErrorCode::SupportTooLarge, "oracle mode support too large");

  using State = std::map<uint32_t, HScalar>;  // bit i = mode i present
  auto apply_phi = [&](const State& s, int i) {
    State r;
    for (const auto& [m, c] : s) {
      if (i > 0) {
        uint32_t higher = m >> (i + 1);
        int sg = __builtin_popcount(higher) % 2 ? -1 : 1;
        if (m & (1u << i)) continue;  // phi_i^2 = 0 for i > 0
        r[m | (1u << i)] += sg > 0 ? c : -c;
      } else if (i == 0) {
        int sg = __builtin_popcount(m >> 1) % 2 ? -1 : 1;
        HScalar v = sg > 0 ? c : -c;
        if (m & 1u)
          r[m & ~1u] += v * Rat(1, 2);  // phi_0 phi_0 = 1/2
        else
          r[m | 1u] += v;
      } else {
        int t = -i;
        if (!(m & (1u << t))) continue;  // annihilated on the vacuum side
        uint32_t higher = m >> (t + 1);
        int sg = __builtin_popcount(higher) % 2 ? -1 : 1;
        if (t % 2) sg = -sg;  // contraction value (-1)^t
        r[m & ~(1u << t)] += sg > 0 ? c : -c;
      }
    }
    return r;
  };

  State st;
  st[0] = HScalar(Rat(1), ht);
  State acc = st;
  State power = st;
  Rat fact(1);
  int cap = A ? 2 * A->size() + 4 : 0;
  for (int m = 1; m <= cap; ++m) {
    State next;
    for (int n = 0; A && n < A->size(); ++n)
      for (int mm = 0; mm < A->size(); ++mm) {
        HScalar c = A->entry(n, mm);
        if (c.is_zero() && c.is_exact()) continue;
        State t = apply_phi(power, n);
        t = apply_phi(t, mm);
        for (auto& [mask, x] : t) next[mask] += x * c;
      }
    power = std::move(next);
    if (power.empty()) break;
    fact *= Rat(m);
    for (const auto& [mask, c] : power) acc[mask] += c * (Rat(1) / fact);
    if (m == cap) fail(ErrorCode::SupportTooLarge, "neutral exponential did not terminate");
  }
  HScalar norm = acc.count(0) ? acc.at(0) : HScalar(Rat(0), ht);
  State cur = std::move(acc);
  for (auto it = word.rbegin(); it != word.rend(); ++it) cur = apply_phi(cur, it->mode.as_int());
  auto it0 = cur.find(0);
  HScalar num = it0 == cur.end() ? HScalar(Rat(0), ht) : it0->second;
  if (norm.is_zero()) fail(ErrorCode::BadNormalization, "vacuum overlap vanished");
  return (num * norm.inv()).with_trunc(ht);
}

}  // namespace

HScalar fock_oracle_vev(const FermionWord& word, const WickState& state, int ht) {
  bool any_charged = false, any_neutral = false;
  for (const auto& l : word) {
    if (l.kind == LabelKind::PsiField || l.kind == LabelKind::PsiStarField ||
        l.kind == LabelKind::PhiField)
      fail(ErrorCode::BadConfig, "oracle takes mode labels only");
    (is_charged(l.kind) ? any_charged : any_neutral) = true;
  }
  if (any_charged && any_neutral)
    fail(ErrorCode::MixedStatistics, "charged and neutral labels in one word");
  if (any_neutral || (!any_charged && state.bkp)) return neutral_oracle(word, state.bkp, ht);
  return charged_oracle(word, state.kp, ht);
}

// ---- bases and dictionaries --------------------------------------------

std::pair<std::vector<ZSeries>, BogoliubovKP> canonical_from_admissible(
    const std::vector<ZSeries>& basis) {
  int K = static_cast<int>(basis.size());
  std::vector<ZSeries> can = basis;
  for (int k = 0; k < K; ++k) {
    auto top = can[k].top();
    if (!top || top->twice != 2 * k + 1 || !eq_window(can[k].coeff(*top), HScalar(1)))
      fail(ErrorCode::NotAdmissible, "basis vector " + std::to_string(k) +
                                         " lacks unit leading term z^{k+1/2}");
    for (int j = k - 1; j >= 0; --j) {
      HScalar c = can[k].coeff(Half::half_odd(j));
      if (c.is_zero() && c.is_exact()) continue;
      can[k] = can[k] - can[j].scaled(c);
    }
  }
  // read off the tail coefficients on the common window
  Half lo = basis.empty() ? Half::half_odd(0) : basis[0].lo();
  for (const auto& f : basis) lo = std::max(lo, f.lo());
  int cols = (-lo.twice - 1) / 2 + 1;  // exponents -i-1/2 >= lo
  if (cols < 0) cols = 0;
  BogoliubovKP B = BogoliubovKP::zeros(K, cols);
  for (int k = 0; k < K; ++k)
    for (int i = 0; i < cols; ++i) B.b[k][i] = can[k].coeff(Half(-2 * i - 1));
  return {can, B};
}

std::vector<HScalar> affine_extract_row0(const ZSeries& psi, int count) {
  if (!eq_window(psi.coeff_int(0), HScalar(1)))
    fail(ErrorCode::BadNormalization, "one-point function must start with 1");
  std::vector<HScalar> r(count);
  for (int i = 0; i < count; ++i) r[i] = psi.coeff_int(-i - 1);
  return r;
}

std::vector<HScalar> affine_extract_col0(const ZSeries& psi_star, int count) {
  if (!eq_window(psi_star.coeff_int(0), HScalar(1)))
    fail(ErrorCode::BadNormalization, "dual one-point function must start with 1");
  std::vector<HScalar> r(count);
  for (int i = 0; i < count; ++i) r[i] = -psi_star.coeff_int(-i - 1);
  return r;
}

std::pair<std::vector<HScalar>, std::vector<HScalar>> affine_extract_bkp(
    const ZSeries& psi_b, const ZSeries& psi_b_tilde, int count) {
  if (!eq_window(psi_b.coeff_int(0), HScalar(Rat(1, 2))))
    fail(ErrorCode::BadNormalization, "first B-type one-point must start with 1/2");
  if (!eq_window(psi_b_tilde.coeff_int(1), HScalar(Rat(-1))))
    fail(ErrorCode::BadNormalization, "second B-type one-point must lead with -z");
  std::vector<HScalar> row0(count), row1(count);
  for (int n = 1; n < count; ++n) {
    HScalar c = psi_b.coeff_int(-n);
    row0[n] = n % 2 == 0 ? c : -c;  // a_{0,n} = (-1)^n [z^{-n}] Psi^B
  }
  row1[0] = -psi_b_tilde.coeff_int(0);  // a_{1,0} = -[z^0]
  for (int n = 1; n < count; ++n) {
    HScalar c = psi_b_tilde.coeff_int(-n) * Rat(1, 2);
    row1[n] = n % 2 == 0 ? -c : c;  // a_{1,n} = (-1)^{n+1} [z^{-n}] / 2
  }
  return {row0, row1};
}

BiSeries two_point_assemble(const BogoliubovKP& b, int ulo, int uhi, int vlo, int vhi) {
  BiSeries r = kernel_expand(KernelKind::KP, ulo, uhi, vlo, vhi);
  for (int k = 0; k < b.rows(); ++k)
    for (int i = 0; i < b.cols(); ++i) r.add_at(-k - 1, -i - 1, b.entry(k, i));
  return r;
}

BiSeries two_point_assemble(const BogoliubovBKP& a, int ulo, int uhi, int vlo, int vhi) {
  BiSeries r = kernel_expand(KernelKind::BKP, ulo, uhi, vlo, vhi);
  auto sgn = [](int n) { return n % 2 == 0 ? Rat(1) : Rat(-1); };
  for (int n = 1; n < a.size(); ++n) {
    r.add_at(-n, 0, a.entry(n, 0) * sgn(n));
    r.add_at(0, -n, a.entry(n, 0) * -sgn(n));
  }
  for (int n = 1; n < a.size(); ++n)
    for (int m = 1; m < a.size(); ++m) r.add_at(-n, -m, a.entry(n, m) * (Rat(2) * sgn(n + m)));
  return r;
}

BogoliubovKP two_point_disassemble_kp(const BiSeries& x, int rows, int cols) {
  BogoliubovKP b = BogoliubovKP::zeros(rows, cols);
  for (int k = 0; k < rows; ++k)
    for (int i = 0; i < cols; ++i) b.b[k][i] = x.at(-k - 1, -i - 1);
  return b;
}

BogoliubovBKP two_point_disassemble_bkp(const BiSeries& x, int size) {
  BogoliubovBKP a = BogoliubovBKP::zeros(size);
  auto sgn = [](int n) { return n % 2 == 0 ? Rat(1) : Rat(-1); };
  for (int n = 1; n < size; ++n) {
    a.a[n][0] = x.at(-n, 0) * sgn(n);
    a.a[0][n] = -a.a[n][0];
  }
  for (int n = 1; n < size; ++n)
    for (int m = 1; m < size; ++m) a.a[n][m] = x.at(-n, -m) * (sgn(n + m) * Rat(1, 2));
  return a;
}

}  // namespace taulift
