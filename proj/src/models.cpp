#include "taulift/models.hpp"

#include <algorithm>
#include <memory>
#include <set>
#include <sstream>

namespace taulift {

namespace {

// e^{c hbar^pw}
HScalar hx(const Rat& c, int pw, int ht) { return HScalar::monomial(c, pw, ht).exp(); }

ZSeries kp_tail(int depth, const std::function<HScalar(int)>& ck) {
  ZSeries r(Parity::Integer, Half::of_int(-depth));
  for (int k = 0; k <= depth; ++k) r.set(Half::of_int(-k), ck(k));
  return r;
}

void check_params(const std::map<std::string, Rat>& params, const std::set<std::string>& allowed,
                  bool (*extra_ok)(const std::string&) = nullptr) {
  for (const auto& [k, v] : params)
    if (!allowed.count(k) && !(extra_ok && extra_ok(k)))
      fail(ErrorCode::BadParams, "unexpected parameter '" + k + "'");
}

Rat get_param(const std::map<std::string, Rat>& params, const std::string& key, const Rat& dflt) {
  auto it = params.find(key);
  return it == params.end() ? dflt : it->second;
}

long param_long(const Rat& r, const std::string& key) {
  if (r.get_den() != 1) fail(ErrorCode::BadParams, "parameter '" + key + "' must be an integer");
  if (!r.get_num().fits_slong_p()) fail(ErrorCode::BadParams, "parameter '" + key + "' out of range");
  return r.get_num().get_si();
}

// --- polynomial helpers (coefficient vectors indexed by z-exponent) ---------

std::vector<Rat> poly_trim(std::vector<Rat> p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
  return p;
}

std::vector<Rat> poly_mul(const std::vector<Rat>& a, const std::vector<Rat>& b) {
  if (a.empty() || b.empty()) return {};
  std::vector<Rat> r(a.size() + b.size() - 1, Rat(0));
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

std::vector<Rat> poly_deriv(const std::vector<Rat>& a) {
  std::vector<Rat> r;
  for (size_t k = 1; k < a.size(); ++k) r.push_back(Rat(static_cast<long>(k)) * a[k]);
  return poly_trim(r);
}

// Laurent-tail expansion of num(z)/den(z) around z = infinity.
struct RatTail {
  std::vector<Rat> num, den;
  int top;
  mutable std::vector<Rat> c;  // c[i] = coefficient of z^{top-i}

  RatTail(std::vector<Rat> n, std::vector<Rat> d) : num(poly_trim(std::move(n))), den(poly_trim(std::move(d))) {
    if (den.empty()) fail(ErrorCode::ZeroInverse, "division by the zero polynomial");
    if (num.empty()) num = {Rat(0)};
    top = static_cast<int>(num.size()) - static_cast<int>(den.size());
  }

  Rat at(int e) const {
    if (e > top) return Rat(0);
    int dn = static_cast<int>(num.size()) - 1;
    int dd = static_cast<int>(den.size()) - 1;
    size_t need = static_cast<size_t>(top - e);
    while (c.size() <= need) {
      int i = static_cast<int>(c.size());
      int k = dn - i;
      Rat acc = (k >= 0 && k <= dn) ? num[k] : Rat(0);
      for (int j = 0; j < dd; ++j) {
        long i2 = static_cast<long>(i) - dd + j;
        if (i2 >= 0) acc -= den[j] * c[i2];
      }
      c.push_back(acc / den[dd]);
    }
    return c[need];
  }
};

// Multiplication by hbar^pw * num/den, as a tail operator symbol.
OpSymbol zmul_rational(std::vector<Rat> num, std::vector<Rat> den, int pw) {
  auto rt = std::make_shared<RatTail>(std::move(num), std::move(den));
  return OpSymbol::zmul_tail(rt->top, [rt, pw](int s, int) { return HScalar::monomial(rt->at(s), pw); });
}

OpSymbol zmul_poly(const std::vector<Rat>& p) {
  ZSeries f(Parity::Integer, Half::of_int(0));
  for (size_t k = 0; k < p.size(); ++k) f.set(Half::of_int(static_cast<int>(k)), HScalar(p[k]));
  return OpSymbol::zmul(f);
}

// --- model builders ---------------------------------------------------------

ModelSpec build_vacuum() {
  ModelSpec m;
  m.name = "vacuum";
  m.hierarchy = Hierarchy::KP;
  m.lifting = OpSymbol::monomial(1, 0);
  m.one_points = [](int depth, int) {
    return OnePoints{kp_tail(depth, [](int k) { return k == 0 ? HScalar(1) : HScalar(); }),
                     kp_tail(depth, [](int k) { return k == 0 ? HScalar(1) : HScalar(); })};
  };
  m.known_affine = [](int, int, int) { return HScalar(); };
  return m;
}

ModelSpec build_vacuum_bkp() {
  ModelSpec m;
  m.name = "vacuum_bkp";
  m.hierarchy = Hierarchy::BKP;
  m.lifting = op_antisym(OpSymbol::monomial(1, 0));
  m.one_points = [](int depth, int) {
    ZSeries pb(Parity::Integer, Half::of_int(-depth));
    pb.set(Half::of_int(0), HScalar(Rat(1, 2)));
    ZSeries pt(Parity::Integer, Half::of_int(-depth));
    pt.set(Half::of_int(1), HScalar(Rat(-1)));
    return OnePoints{pb, pt};
  };
  m.known_affine = [](int, int, int) { return HScalar(); };
  return m;
}

ModelSpec build_simple_hurwitz() {
  ModelSpec m;
  m.name = "simple_hurwitz";
  m.hierarchy = Hierarchy::KP;
  m.lifting = OpSymbol::term(1, [](Half n, int ht) { return hx(n.as_rat() + 1, 1, ht); });
  m.one_points = [](int depth, int ht) {
    auto psi = kp_tail(depth, [ht](int k) {
      return hx(rat(static_cast<long>(k) * k - k, 2), 1, ht) *
             HScalar::monomial(Rat(1) / rat_factorial(k), -k, ht);
    });
    auto psi_star = kp_tail(depth, [ht](int k) {
      Rat s = k % 2 ? Rat(-1) : Rat(1);
      return hx(rat(-(static_cast<long>(k) * k - k), 2), 1, ht) *
             HScalar::monomial(s / rat_factorial(k), -k, ht);
    });
    return OnePoints{psi, psi_star};
  };
  m.known_affine = [](int n, int mm, int ht) {
    Rat sgn = n % 2 ? Rat(-1) : Rat(1);
    long e = static_cast<long>(mm) * (mm + 1) - static_cast<long>(n) * (n + 1);
    Rat den = Rat(mm + n + 1) * rat_factorial(mm) * rat_factorial(n);
    return hx(rat(e, 2), 1, ht) * HScalar::monomial(sgn / den, -(mm + n + 1), ht);
  };
  return m;
}

ModelSpec build_framed_vertex(const std::map<std::string, Rat>& params) {
  check_params(params, {"f"});
  Rat f = get_param(params, "f", Rat(0));
  ModelSpec m;
  m.name = "framed_vertex";
  m.hierarchy = Hierarchy::KP;
  m.params = {{"f", f}};
  m.lifting = OpSymbol::term(1, [f](Half n, int ht) { return hx(f * (n.as_rat() + 1), 1, ht); });
  // quantum integer [j] = sinh(j hbar / 2) and its factorial
  auto qint = [](long j, int ht) {
    return (hx(rat(j, 2), 1, ht) - hx(rat(-j, 2), 1, ht)) * Rat(1, 2);
  };
  auto qfact_inv = [qint](long k, int ht) {
    HScalar acc = HScalar::one(ht);
    for (long j = 1; j <= k; ++j) acc *= qint(j, ht);
    return k == 0 ? acc : acc.inv();
  };
  m.one_points = [f, qfact_inv](int depth, int ht) {
    auto psi = kp_tail(depth, [&](int k) {
      Rat e = (Rat(2) * f + 1) * rat(static_cast<long>(k) * (k - 1), 4);
      return hx(e, 1, ht) * qfact_inv(k, ht);
    });
    auto psi_star = kp_tail(depth, [&](int k) {
      Rat e = (Rat(2) * f + 1) * rat(static_cast<long>(k) * (k - 1), 4);
      Rat s = k % 2 ? Rat(-1) : Rat(1);
      return hx(-e, 1, ht) * qfact_inv(k, ht) * s;
    });
    return OnePoints{psi, psi_star};
  };
  m.known_affine = [f, qint, qfact_inv](int n, int mm, int ht) {
    Rat e = (Rat(2) * f + 1) * rat(static_cast<long>(mm + n + 1) * (mm - n), 4);
    Rat s = n % 2 ? Rat(-1) : Rat(1);
    return hx(e, 1, ht) * qint(mm + n + 1, ht).inv() * qfact_inv(mm, ht) * qfact_inv(n, ht) * s;
  };
  return m;
}

ModelSpec build_monotone_hurwitz() {
  ModelSpec m;
  m.name = "monotone_hurwitz";
  m.hierarchy = Hierarchy::KP;
  m.lifting = OpSymbol::term(1, [](Half n, int) {
    return HScalar(1) + HScalar::monomial(n.as_rat() + 1, 1);
  });
  auto lin_inv = [](const Rat& j, int ht) {  // 1/(1 + j hbar)
    return (HScalar(1) + HScalar::monomial(j, 1)).with_trunc(ht).inv();
  };
  m.one_points = [lin_inv](int depth, int ht) {
    auto psi = kp_tail(depth, [&](int k) {
      HScalar acc = HScalar::monomial(Rat(1) / rat_factorial(k), -k, ht);
      for (long j = 1; j <= k - 1; ++j) acc *= lin_inv(Rat(-j), ht);
      return acc;
    });
    auto psi_star = kp_tail(depth, [&](int k) {
      Rat s = k % 2 ? Rat(-1) : Rat(1);
      HScalar acc = HScalar::monomial(s / rat_factorial(k), -k, ht);
      for (long j = 1; j <= k - 1; ++j) acc *= lin_inv(Rat(j), ht);
      return acc;
    });
    return OnePoints{psi, psi_star};
  };
  m.known_affine = [lin_inv](int n, int mm, int ht) {
    Rat s = n % 2 ? Rat(-1) : Rat(1);
    Rat den = Rat(mm + n + 1) * rat_factorial(mm) * rat_factorial(n);
    HScalar acc = HScalar::monomial(s / den, -(mm + n + 1), ht);
    for (long j = -mm; j <= n; ++j) acc *= lin_inv(Rat(j), ht);
    return acc;
  };
  return m;
}

ModelSpec build_dessins(const std::map<std::string, Rat>& params) {
  check_params(params, {"alpha", "beta"});
  Rat al = get_param(params, "alpha", Rat(2));
  Rat be = get_param(params, "beta", Rat(3));
  ModelSpec m;
  m.name = "dessins";
  m.hierarchy = Hierarchy::KP;
  m.params = {{"alpha", al}, {"beta", be}};
  m.lifting = op_add(OpSymbol::monomial(1, 0), OpSymbol::term(0, [](Half n, int) {
                       return HScalar::monomial(n.as_rat(), 1);
                     }));
  auto lin = [](const Rat& a, const Rat& j) {  // a + j hbar
    return HScalar(a) + HScalar::monomial(j, 1);
  };
  m.one_points = [al, be, lin](int depth, int ht) {
    auto psi = kp_tail(depth, [&](int k) {
      HScalar acc = HScalar::monomial(Rat(1) / rat_factorial(k), -k, ht);
      for (long j = 0; j <= k - 1; ++j) acc *= lin(al, Rat(j)) * lin(be, Rat(j));
      return acc;
    });
    auto psi_star = kp_tail(depth, [&](int k) {
      Rat s = k % 2 ? Rat(-1) : Rat(1);
      HScalar acc = HScalar::monomial(s / rat_factorial(k), -k, ht);
      for (long j = 0; j <= k - 1; ++j) acc *= lin(al, Rat(-j)) * lin(be, Rat(-j));
      return acc;
    });
    return OnePoints{psi, psi_star};
  };
  m.known_affine = [al, be, lin](int n, int mm, int ht) {
    Rat s = n % 2 ? Rat(-1) : Rat(1);
    Rat den = Rat(mm + n + 1) * rat_factorial(mm) * rat_factorial(n);
    HScalar acc = HScalar::monomial(s / den, -(mm + n + 1), ht);
    for (long j = -n; j <= mm; ++j) acc *= lin(al, Rat(j)) * lin(be, Rat(j));
    return acc;
  };
  return m;
}

ModelSpec build_rspin(const std::map<std::string, Rat>& params) {
  check_params(params, {"r"});
  long r = param_long(get_param(params, "r", Rat(2)), "r");
  if (r < 2) fail(ErrorCode::BadParams, "r-spin needs r >= 2");
  int ri = static_cast<int>(r);
  ModelSpec m;
  m.name = "rspin";
  m.hierarchy = Hierarchy::KP;
  m.params = {{"r", Rat(r)}};
  // l = z - hbar z^{-r} (z d/dz + (1-r)/2)
  m.lifting = op_add(OpSymbol::monomial(1, 0), OpSymbol::term(-ri, [ri](Half n, int) {
                       return HScalar::monomial(-(n.as_rat() + rat(1 - ri, 2)), 1);
                     }));
  OpSymbol l = m.lifting;
  OpSymbol zr = OpSymbol::monomial(ri, 0);
  OpSymbol E = op_sub(op_pow(l, ri), zr);
  OpSymbol Estar = op_sub(op_pow(op_adjoint(l), ri), zr);
  m.one_points = [E, Estar](int depth, int ht) {
    return OnePoints{solve_one_point_qc(E, HScalar(1), depth, ht),
                     solve_one_point_qc(Estar, HScalar(1), depth, ht)};
  };
  m.closed_two_point = [m_one = m.one_points, l, ri](int N, int ht) {
    int depth = (ri + 1) * N + 2 * ri + 2;
    OnePoints op = m_one(depth, ht);
    return rspin_closed_two_point(l, ri, op.psi, op.psi_star, N, ht);
  };
  return m;
}

ModelSpec build_gkm(const std::map<std::string, Rat>& params) {
  // Potential V = sum c_k z^k given by parameters c2, c3, ...; hbar-free.
  check_params(params, {}, [](const std::string& k) {
    return k.size() >= 2 && k[0] == 'c' && k.find_first_not_of("0123456789", 1) == std::string::npos;
  });
  std::vector<Rat> V(2, Rat(0));
  if (params.empty()) {
    V = {Rat(0), Rat(0), Rat(0), Rat(1, 6), Rat(1, 12)};  // z^4/12 + z^3/6
  } else {
    for (const auto& [k, v] : params) {
      size_t e = std::stoul(k.substr(1));
      if (e < 2) fail(ErrorCode::BadParams, "potential starts at z^2");
      if (V.size() <= e) V.resize(e + 1, Rat(0));
      V[e] = v;
    }
  }
  std::vector<Rat> x = poly_deriv(V);     // the spectral coordinate x = V'
  std::vector<Rat> xp = poly_deriv(x);    // x'
  std::vector<Rat> xpp = poly_deriv(xp);  // x''
  if (xp.empty()) fail(ErrorCode::BadParams, "potential must have degree >= 2");
  ModelSpec m;
  m.name = "gkm";
  m.hierarchy = Hierarchy::KP;
  m.params = params;
  // l = z - hbar (1/x') d/dz + hbar x''/(2 x'^2)
  OpSymbol corr = zmul_rational(xpp, poly_mul({Rat(2)}, poly_mul(xp, xp)), 1);
  OpSymbol grad = op_compose(zmul_rational({Rat(1)}, xp, 1), OpSymbol::monomial(0, 1));
  m.lifting = op_add(op_sub(OpSymbol::monomial(1, 0), grad), corr);
  OpSymbol l = m.lifting;
  // quantum-curve operators x(l) - x(z) and x(l*) - x(z)
  auto curve = [&x](const OpSymbol& a) {
    OpSymbol acc = OpSymbol::zero();
    OpSymbol pw = OpSymbol::identity();
    for (size_t k = 0; k < x.size(); ++k) {
      if (k > 0) pw = op_compose(pw, a);
      if (x[k] != 0) acc = op_add(acc, op_scale(pw, HScalar(x[k])));
    }
    return op_sub(acc, zmul_poly(x));
  };
  OpSymbol E = curve(l);
  OpSymbol Estar = curve(op_adjoint(l));
  m.one_points = [E, Estar](int depth, int ht) {
    return OnePoints{solve_one_point_qc(E, HScalar(1), depth, ht),
                     solve_one_point_qc(Estar, HScalar(1), depth, ht)};
  };
  int d = static_cast<int>(x.size()) - 1;
  m.closed_two_point = [m_one = m.one_points, l, x, d](int N, int ht) {
    int depth = (d + 1) * N + 2 * d + 2;
    OnePoints op = m_one(depth, ht);
    return gkm_closed_two_point(l, x, op.psi, op.psi_star, N, ht);
  };
  return m;
}

ModelSpec build_bgw() {
  ModelSpec m;
  m.name = "bgw";
  m.hierarchy = Hierarchy::BKP;
  // l = z - (hbar/2) z d/dz, already in the anti-fixed algebra
  OpSymbol l = op_add(OpSymbol::monomial(1, 0), OpSymbol::term(0, [](Half n, int) {
                        return HScalar::monomial(-n.as_rat() / 2, 1);
                      }));
  m.lifting = op_antisym(l);
  m.one_points = [](int depth, int ht) {
    ZSeries pb(Parity::Integer, Half::of_int(-depth));
    for (int n = 0; n <= depth; ++n) {
      Rat df = rat_double_factorial(2 * n - 1);
      Rat c = (n % 2 ? Rat(-1) : Rat(1)) * df * df / (rat_pow(Rat(2), 3 * n + 1) * rat_factorial(n));
      pb.set(Half::of_int(-n), HScalar::monomial(c, n, ht));
    }
    ZSeries pt(Parity::Integer, Half::of_int(-depth));
    pt.set(Half::of_int(1), HScalar(Rat(-1)));
    pt.set(Half::of_int(0), HScalar::monomial(Rat(1, 16), 1, ht));
    for (int n = 1; n <= depth; ++n) {
      Rat df = rat_double_factorial(2 * n - 1);
      Rat c = Rat(-2) * (n % 2 ? Rat(-1) : Rat(1)) * Rat(n - 1) * df * df /
              (rat_pow(Rat(2), 3 * n + 5) * Rat(n + 1) * rat_factorial(n));
      pt.set(Half::of_int(-n), HScalar::monomial(c, n + 1, ht));
    }
    return OnePoints{pb, pt};
  };
  m.closed_two_point = [m_one = m.one_points, l](int N, int ht) {
    OnePoints op = m_one(2 * N + 2, ht);
    return bgw_closed_two_point(l, op.psi, N, ht);
  };
  return m;
}

ModelSpec build_spin_hurwitz(const std::map<std::string, Rat>& params) {
  check_params(params, {"r"});
  long r = param_long(get_param(params, "r", Rat(1)), "r");
  if (r < 1 || r % 2 == 0) fail(ErrorCode::BadParams, "spin Hurwitz needs odd r >= 1");
  int ri = static_cast<int>(r);
  ModelSpec m;
  m.name = "spin_hurwitz";
  m.hierarchy = Hierarchy::BKP;
  m.params = {{"r", Rat(r)}};
  Rat r1(ri + 1);
  // Already iota-antisymmetric: the eigenvalue depends on n through
  // max(n, -n-1), and it is 1 at n = 0 and n = -1.
  m.lifting = OpSymbol::term(1, [ri, r1](Half n, int ht) {
    Rat nn = n.as_rat();
    Rat mm = nn >= 0 ? nn : -nn - 1;
    Rat p = (rat_pow(mm, ri + 1) - rat_pow(mm + 1, ri + 1) + 1) / r1;
    return HScalar::monomial(p, ri, ht).exp();
  });
  auto a0n = [ri, r1](long n, int ht) {  // a_{0,n}, n >= 1
    Rat e = rat_pow(Rat(n), ri + 1) / r1;
    return hx(e, ri, ht) * HScalar::monomial(Rat(1, 2) / rat_factorial(n), -static_cast<int>(n), ht);
  };
  auto affine = [ri, r1, a0n](int n, int mm, int ht) -> HScalar {
    if (n == 0 && mm == 0) return HScalar();
    if (mm == 0) return -a0n(n, ht);
    if (n == 0) return a0n(mm, ht);
    if (n == mm) return HScalar();
    Rat e = (rat_pow(Rat(mm), ri + 1) + rat_pow(Rat(n), ri + 1)) / r1;
    Rat c = rat(mm - n, 4 * static_cast<long>(mm + n)) / (rat_factorial(mm) * rat_factorial(n));
    return hx(e, ri, ht) * HScalar::monomial(c, -(mm + n), ht);
  };
  m.known_affine = affine;
  m.one_points = [affine](int depth, int ht) {
    ZSeries pb(Parity::Integer, Half::of_int(-depth));
    pb.set(Half::of_int(0), HScalar(Rat(1, 2)));
    for (int n = 1; n <= depth; ++n) {
      Rat s = n % 2 ? Rat(-1) : Rat(1);
      pb.set(Half::of_int(-n), affine(0, n, ht) * s);
    }
    ZSeries pt(Parity::Integer, Half::of_int(-depth));
    pt.set(Half::of_int(1), HScalar(Rat(-1)));
    pt.set(Half::of_int(0), -affine(1, 0, ht));
    for (int n = 1; n <= depth; ++n) {
      Rat s = n % 2 ? Rat(-2) : Rat(2);
      pt.set(Half::of_int(-n), affine(1, n, ht) * -s);
    }
    return OnePoints{pb, pt};
  };
  return m;
}

}  // namespace

std::vector<std::string> model_names() {
  return {"vacuum",        "vacuum_bkp",       "simple_hurwitz", "framed_vertex",
          "monotone_hurwitz", "dessins",       "rspin",          "gkm",
          "bgw",           "spin_hurwitz"};
}

ModelSpec model_instantiate(const std::string& name, const std::map<std::string, Rat>& params) {
  if (name == "vacuum") {
    check_params(params, {});
    return build_vacuum();
  }
  if (name == "vacuum_bkp") {
    check_params(params, {});
    return build_vacuum_bkp();
  }
  if (name == "simple_hurwitz") {
    check_params(params, {});
    return build_simple_hurwitz();
  }
  if (name == "framed_vertex") return build_framed_vertex(params);
  if (name == "monotone_hurwitz") {
    check_params(params, {});
    return build_monotone_hurwitz();
  }
  if (name == "dessins") return build_dessins(params);
  if (name == "rspin") return build_rspin(params);
  if (name == "gkm") return build_gkm(params);
  if (name == "bgw") {
    check_params(params, {});
    return build_bgw();
  }
  if (name == "spin_hurwitz") return build_spin_hurwitz(params);
  if (name == "gw_Pr")
    fail(ErrorCode::UnknownModel,
         "model 'gw_Pr' needs the descendent-insertion calculus, which is outside the scope of "
         "this library");
  std::ostringstream os;
  os << "unknown model '" << name << "'; available:";
  for (const auto& n : model_names()) os << " " << n;
  fail(ErrorCode::UnknownModel, os.str());
}

}  // namespace taulift
