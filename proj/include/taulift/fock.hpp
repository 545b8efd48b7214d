#pragma once

#include <map>
#include <utility>
#include <vector>

#include "taulift/biseries.hpp"
#include "taulift/errors.hpp"
#include "taulift/hscalar.hpp"
#include "taulift/zseries.hpp"

namespace taulift {

// Affine coordinates b_{k,i} of a charged Bogoliubov state c*e^A|0>,
// A = sum b_{k,i} psi*_{-i-1/2} psi_{k+1/2}.
struct BogoliubovKP {
  std::vector<std::vector<HScalar>> b;

  int rows() const { return static_cast<int>(b.size()); }
  int cols() const { return b.empty() ? 0 : static_cast<int>(b[0].size()); }
  HScalar entry(int k, int i) const {
    if (k < 0 || i < 0 || k >= rows() || i >= cols()) return HScalar();
    return b[k][i];
  }
  static BogoliubovKP zeros(int r, int c) {
    BogoliubovKP m;
    m.b.assign(r, std::vector<HScalar>(c));
    return m;
  }
};

// Neutral affine coordinates a_{n,m} = -a_{m,n}, A = sum a_{n,m} phi_m phi_n.
struct BogoliubovBKP {
  std::vector<std::vector<HScalar>> a;

  int size() const { return static_cast<int>(a.size()); }
  HScalar entry(int n, int m) const {
    if (n < 0 || m < 0 || n >= size() || m >= size()) return HScalar();
    return a[n][m];
  }
  static BogoliubovBKP zeros(int s) {
    BogoliubovBKP m;
    m.a.assign(s, std::vector<HScalar>(s));
    return m;
  }
  void check_antisym() const;  // throws AntisymmetryViolated
};

enum class LabelKind { Psi, PsiStar, Phi, PsiField, PsiStarField, PhiField };

struct FLabel {
  LabelKind kind;
  Half mode{};  // for mode labels; Phi uses integer Half
  int var = 0;  // for field labels: 0 -> u, 1 -> v

  static FLabel psi(Half k) { return {LabelKind::Psi, k, 0}; }
  static FLabel psi_star(Half k) { return {LabelKind::PsiStar, k, 0}; }
  static FLabel phi(int i) { return {LabelKind::Phi, Half::of_int(i), 0}; }
  static FLabel psi_field(int var) { return {LabelKind::PsiField, Half(), var}; }
  static FLabel psi_star_field(int var) { return {LabelKind::PsiStarField, Half(), var}; }
  static FLabel phi_field(int var) { return {LabelKind::PhiField, Half(), var}; }
};

using FermionWord = std::vector<FLabel>;

// Sparse series in up to two field variables; a pure scalar lives at (0,0).
// Each field variable occurs in exactly one word label, so products never
// convolve a variable with itself.
struct MultiSeries {
  std::map<std::pair<int, int>, HScalar> c;

  void add(int a, int b, const HScalar& x) {
    if (x.is_zero() && x.is_exact()) return;
    auto& slot = c[{a, b}];
    slot += x;
    if (slot.is_zero() && slot.is_exact()) c.erase({a, b});
  }
  static MultiSeries scalar(const HScalar& x) {
    MultiSeries r;
    r.add(0, 0, x);
    return r;
  }
  HScalar as_scalar() const {
    HScalar r;
    for (const auto& [e, x] : c) {
      if (e.first != 0 || e.second != 0)
        fail(ErrorCode::BadConfig, "MultiSeries carries field exponents; not a scalar");
      r = x;
    }
    return r;
  }
  BiSeries to_biseries(int ulo, int uhi, int vlo, int vhi, bool uex = false, bool vex = false) const {
    BiSeries r(ulo, uhi, vlo, vhi, uex, vex);
    for (const auto& [e, x] : c) r.add_at(e.first, e.second, x);
    return r;
  }

  friend MultiSeries operator+(const MultiSeries& a, const MultiSeries& b) {
    MultiSeries r = a;
    for (const auto& [e, x] : b.c) r.add(e.first, e.second, x);
    return r;
  }
  friend MultiSeries operator*(const MultiSeries& a, const MultiSeries& b) {
    MultiSeries r;
    for (const auto& [ea, xa] : a.c)
      for (const auto& [eb, xb] : b.c) r.add(ea.first + eb.first, ea.second + eb.second, xa * xb);
    return r;
  }
  MultiSeries scaled(const Rat& s) const {
    MultiSeries r;
    for (const auto& [e, x] : c) r.add(e.first, e.second, x * s);
    return r;
  }
};

// Evaluation options: floors bound the kernel expansions attached to field
// labels; ht is the hbar truncation.
struct WickOpts {
  int ulo = -12;
  int vlo = -12;
  int ht = kTruncInf;
};

struct WickState {
  const BogoliubovKP* kp = nullptr;
  const BogoliubovBKP* bkp = nullptr;

  static WickState vacuum() { return {}; }
  static WickState of(const BogoliubovKP& m) { return {&m, nullptr}; }
  static WickState of(const BogoliubovBKP& m) { return {nullptr, &m}; }
};

// Normalized VEV <0| word e^A |0> / <0|e^A|0> via the Wick matching sum.
MultiSeries wick_vev(const FermionWord& word, const WickState& state, const WickOpts& opts);
HScalar wick_vev_scalar(const FermionWord& word, const WickState& state, int ht = kTruncInf);

// Independent oracle: literal action on a finite-mode Fock space, e^A expanded
// to nilpotency; no Wick theorem. Mode labels only.
HScalar fock_oracle_vev(const FermionWord& word, const WickState& state, int ht = kTruncInf);

// Gauss elimination of an admissible basis (phi_k = z^{k+1/2} + lower) into the
// canonical basis phi~_k = z^{k+1/2} + sum_i b_{k,i} z^{-i-1/2}.
std::pair<std::vector<ZSeries>, BogoliubovKP> canonical_from_admissible(
    const std::vector<ZSeries>& basis);

// One-point series <-> affine coordinate dictionaries.
std::vector<HScalar> affine_extract_row0(const ZSeries& psi, int count);        // b_{0,i}
std::vector<HScalar> affine_extract_col0(const ZSeries& psi_star, int count);   // b_{i,0}
// Rows 0 and 1 of the BKP coordinates from the two one-point functions.
std::pair<std::vector<HScalar>, std::vector<HScalar>> affine_extract_bkp(
    const ZSeries& psi_b, const ZSeries& psi_b_tilde, int count);

// Two-point function from coordinates (kernel + affine tail), and back.
BiSeries two_point_assemble(const BogoliubovKP& b, int ulo, int uhi, int vlo, int vhi);
BiSeries two_point_assemble(const BogoliubovBKP& a, int ulo, int uhi, int vlo, int vhi);
BogoliubovKP two_point_disassemble_kp(const BiSeries& x, int rows, int cols);
BogoliubovBKP two_point_disassemble_bkp(const BiSeries& x, int size);

}  // namespace taulift
