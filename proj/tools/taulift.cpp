#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "taulift/models.hpp"
#include "taulift/serialize.hpp"
#include "taulift/solver.hpp"

using namespace taulift;

namespace {

constexpr int kExitVerifyFail = 1;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

struct VerifyFail {
  std::string what;
};

struct RunConfig {
  std::string model;
  std::map<std::string, Rat> params;
  int order = 4;
  int h_trunc = 12;
  std::string method = "recursion";
  std::string what = "two-point";
  std::string format = "json";
  std::string out;
  std::string perturb;
  bool all = false;
};

std::map<std::string, Rat> parse_params(const std::vector<std::string>& kvs) {
  std::map<std::string, Rat> r;
  for (const auto& kv : kvs) {
    auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      fail(ErrorCode::BadConfig, "--param expects key=value, got '" + kv + "'");
    Rat v;
    try {
      v = Rat(kv.substr(eq + 1));
      v.canonicalize();
    } catch (const std::exception&) {
      fail(ErrorCode::BadConfig, "parameter value in '" + kv + "' is not a rational");
    }
    r[kv.substr(0, eq)] = v;
  }
  return r;
}

void emit(const RunConfig& cfg, const std::string& content) {
  if (cfg.out.empty())
    std::cout << content;
  else
    atomic_write(cfg.out, content);
}

// The solved recursion matrix, with an optional single-entry perturbation.
struct Solved {
  ModelSpec model;
  std::vector<std::vector<HScalar>> mat;  // b (KP) or a (BKP)
  OnePoints op;
  int checked = 0;
};

Solved solve_model(const RunConfig& cfg) {
  Solved s;
  s.model = model_instantiate(cfg.model, cfg.params);
  int N = cfg.order, H = cfg.h_trunc;
  if (N < 1 || H < 1) fail(ErrorCode::BadConfig, "--order and --h-trunc must be >= 1");
  s.op = s.model.one_points(N + 2, H);
  if (s.model.hierarchy == Hierarchy::KP) {
    SolveReportKP rep = solve_two_point_kp(s.model.lifting, s.op.psi, s.op.psi_star, N, H);
    s.mat = rep.b.b;
    s.checked = rep.cells_checked;
  } else {
    SolveReportBKP rep = solve_two_point_bkp(s.model.lifting, s.op.psi, s.op.psi_star, N, H);
    s.mat = rep.a.a;
    s.checked = rep.cells_checked;
  }
  return s;
}

BiSeries assemble(const Solved& s, int N) {
  if (s.model.hierarchy == Hierarchy::KP)
    return two_point_assemble(BogoliubovKP{s.mat}, -N - 1, 0, -N - 1, N);
  return two_point_assemble(BogoliubovBKP{s.mat}, -N, 1, -N, N);
}

BiSeries candidate_residual(const Solved& s, const BiSeries& cand, int H) {
  if (s.model.hierarchy == Hierarchy::KP)
    return residual_kp(s.model.lifting, s.op.psi, s.op.psi_star, cand, H);
  return residual_bkp(s.model.lifting, s.op.psi, s.op.psi_star, cand, H);
}

int first_h_exp(const HScalar& x) {
  return x.terms().empty() ? 0 : x.terms().begin()->first;
}

int cmd_models() {
  for (const auto& n : model_names()) std::cout << n << "\n";
  return 0;
}

int cmd_compute(const RunConfig& cfg) {
  ModelSpec m = model_instantiate(cfg.model, cfg.params);
  int N = cfg.order, H = cfg.h_trunc;
  if (cfg.what == "one-point" || cfg.what == "one-point-dual") {
    OnePoints op = m.one_points(N, H);
    const ZSeries& x = cfg.what == "one-point" ? op.psi : op.psi_star;
    emit(cfg, cfg.format == "csv" ? csv_zseries(x) : json_zseries("z", x));
    return 0;
  }
  if (cfg.what != "two-point")
    fail(ErrorCode::BadConfig, "--what must be one-point, one-point-dual, or two-point");
  BiSeries out;
  if (cfg.method == "closed") {
    if (!m.has_closed_two_point())
      fail(ErrorCode::BadConfig, "model '" + cfg.model + "' has no closed two-point evaluator");
    out = m.closed_two_point(N, H);
  } else if (cfg.method == "recursion" || cfg.method == "both") {
    Solved s = solve_model(cfg);
    out = assemble(s, N);
    if (cfg.method == "both") {
      if (!m.has_closed_two_point())
        fail(ErrorCode::BadConfig, "model '" + cfg.model + "' has no closed two-point evaluator");
      BiSeries closed = m.closed_two_point(N, H);
      if (!eq_window(out, closed))
        throw VerifyFail{"closed and recursion two-point outputs differ"};
    }
  } else {
    fail(ErrorCode::BadConfig, "--method must be recursion, closed, or both");
  }
  emit(cfg, cfg.format == "csv" ? csv_biseries(out) : json_biseries("uv", out));
  return 0;
}

int cmd_export(const RunConfig& cfg) {
  Solved s = solve_model(cfg);
  std::string content;
  if (s.model.hierarchy == Hierarchy::KP) {
    BogoliubovKP b{s.mat};
    content = cfg.format == "csv" ? csv_affine(b) : json_affine("b", b);
  } else {
    BogoliubovBKP a{s.mat};
    content = cfg.format == "csv" ? csv_affine(a) : json_affine("a", a);
  }
  emit(cfg, content);
  return 0;
}

std::string verify_one(const RunConfig& cfg) {
  std::ostringstream rep;
  Solved s = solve_model(cfg);
  int N = cfg.order, H = cfg.h_trunc;
  rep << cfg.model << ": equations checked: " << s.checked << "\n";

  if (!cfg.perturb.empty()) {
    int pi, pj;
    char comma;
    std::istringstream is(cfg.perturb);
    if (!(is >> pi >> comma >> pj) || comma != ',')
      fail(ErrorCode::BadConfig, "--perturb expects i,j");
    if (pi < 0 || pj < 0 || pi >= static_cast<int>(s.mat.size()) ||
        pj >= static_cast<int>(s.mat.size()))
      fail(ErrorCode::BadConfig, "--perturb entry outside the solved window");
    if (pi + pj > N)
      fail(ErrorCode::BadConfig, "--perturb entry outside the solved triangle");
    Solved p = s;
    p.mat[pi][pj] += HScalar(1);
    BiSeries res = candidate_residual(p, assemble(p, N), H);
    // Only equations whose references lie inside the solved triangle count.
    int limit = s.model.hierarchy == Hierarchy::KP ? N + 1 : N - 1;
    bool hit = false;
    for (int a = res.ulo(); a <= res.uhi() && !hit; ++a)
      for (int b = res.vlo(); b <= res.vhi() && !hit; ++b)
        if (-a - b <= limit && !res.at(a, b).is_zero()) hit = true;
    if (!hit)
      fail(ErrorCode::InconsistentData, "perturbed entry left the residual zero");
    std::ostringstream os;
    os << "residual nonzero after perturbation; first offending entry ("
       << pi << "," << pj << "," << first_h_exp(s.mat[pi][pj] - p.mat[pi][pj]) << ")";
    throw VerifyFail{os.str()};
  }

  // Residual of the assembled output, re-derived outside the solver. Only the
  // anti-diagonal region whose equations reference solved entries is scanned:
  // the assembled square window carries unsolved (hence zero) cells beyond the
  // triangle i + j <= N.
  BiSeries res = candidate_residual(s, assemble(s, N), H);
  int limit = s.model.hierarchy == Hierarchy::KP ? N + 1 : N - 1;
  int cells = 0;
  for (int a = res.ulo(); a <= res.uhi(); ++a)
    for (int b = res.vlo(); b <= res.vhi(); ++b) {
      if (-a - b > limit) continue;
      ++cells;
      if (!res.at(a, b).is_zero()) {
        std::ostringstream os;
        os << "residual nonzero at (" << a << "," << b << "," << first_h_exp(res.at(a, b)) << ")";
        throw VerifyFail{os.str()};
      }
    }
  rep << cfg.model << ": residual zero on " << cells << " cells of [" << res.ulo() << ","
      << res.uhi() << "]x[" << res.vlo() << "," << res.vhi() << "]\n";

  if (s.model.has_known_affine()) {
    int matched = 0;
    for (int i = 0; i + 0 <= N; ++i)
      for (int j = 0; i + j <= N; ++j) {
        HScalar want = s.model.known_affine(i, j, H);
        if (!eq_window(s.mat[i][j], want)) {
          std::ostringstream os;
          os << "known-coordinate mismatch at (" << i << "," << j << ","
             << first_h_exp(s.mat[i][j] - want) << ")";
          throw VerifyFail{os.str()};
        }
        ++matched;
      }
    rep << cfg.model << ": closed coordinates matched: " << matched << "\n";
  }

  if (s.model.has_closed_two_point() && (cfg.method == "closed" || cfg.method == "both")) {
    BiSeries closed = s.model.closed_two_point(N, H);
    BiSeries rec = assemble(s, N);
    // The recursion only determines coordinates with i + j <= N; skip the
    // cells of the square window beyond that triangle.
    int climit = s.model.hierarchy == Hierarchy::KP ? N + 2 : N;
    for (int a = closed.ulo(); a <= closed.uhi(); ++a)
      for (int b = closed.vlo(); b <= closed.vhi(); ++b) {
        if (!rec.in_window(a, b) || -a - b > climit) continue;
        if (!eq_window(closed.at(a, b), rec.at(a, b))) {
          std::ostringstream os;
          os << "closed-vs-recursion mismatch at (" << a << "," << b << ","
             << first_h_exp(closed.at(a, b) - rec.at(a, b)) << ")";
          throw VerifyFail{os.str()};
        }
      }
    BiSeries cres = candidate_residual(s, closed, H);
    if (!cres.window_zero()) throw VerifyFail{"closed two-point residual nonzero"};
    rep << cfg.model << ": closed two-point agrees; max-diff 0\n";
  }
  rep << cfg.model << ": PASS\n";
  return rep.str();
}

int cmd_verify(const RunConfig& cfg) {
  if (!cfg.all) {
    std::cout << verify_one(cfg);
    return 0;
  }
  struct Task {
    RunConfig cfg;
    std::string out;
    int code = 0;
  };
  std::vector<Task> tasks;
  for (const auto& name : model_names()) {
    RunConfig c = cfg;
    c.model = name;
    c.params.clear();
    c.method = "both";
    tasks.push_back({c, "", 0});
  }
  unsigned threads = std::thread::hardware_concurrency();
  if (const char* env = std::getenv("TAULIFT_THREADS")) {
    long t = std::strtol(env, nullptr, 10);
    if (t >= 1) threads = static_cast<unsigned>(t);
  }
  threads = std::max(1u, std::min<unsigned>(threads, tasks.size()));
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < tasks.size(); i = next++) {
      try {
        tasks[i].out = verify_one(tasks[i].cfg);
      } catch (const VerifyFail& f) {
        tasks[i].out = tasks[i].cfg.model + ": FAIL: " + f.what + "\n";
        tasks[i].code = kExitVerifyFail;
      } catch (const TauliftError& e) {
        tasks[i].out = tasks[i].cfg.model + ": ERROR [" + std::string(error_name(e.code())) +
                       "]: " + e.what() + "\n";
        tasks[i].code = kExitSolver;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  int rc = 0;
  for (const auto& t : tasks) {
    std::cout << t.out;
    rc = std::max(rc, t.code);
  }
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact lifting-operator calculus for KP/BKP tau-functions"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::vector<std::string> raw_params;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--model", cfg.model, "model name (see 'taulift models')");
    sub->add_option("--param", raw_params, "model parameter key=value (repeatable)");
    sub->add_option("--order", cfg.order, "window order N");
    sub->add_option("--h-trunc", cfg.h_trunc, "hbar truncation order H");
    sub->add_option("--method", cfg.method, "recursion | closed | both");
    sub->add_option("--format", cfg.format, "json | csv");
    sub->add_option("--out", cfg.out, "output path (written atomically)");
  };

  CLI::App* c_models = app.add_subcommand("models", "list available models");
  CLI::App* c_compute = app.add_subcommand("compute", "compute series");
  add_common(c_compute);
  c_compute->add_option("--what", cfg.what, "one-point | one-point-dual | two-point");
  CLI::App* c_verify = app.add_subcommand("verify", "verify residuals and closed forms");
  add_common(c_verify);
  c_verify->add_flag("--all", cfg.all, "verify every registered model");
  c_verify->add_option("--perturb", cfg.perturb, "i,j: perturb one solved entry (negative control)")
      ->group("");
  CLI::App* c_export = app.add_subcommand("export", "export the affine coordinate table");
  add_common(c_export);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    cfg.params = parse_params(raw_params);
    if (c_models->parsed()) return cmd_models();
    if (!cfg.all && cfg.model.empty()) fail(ErrorCode::BadConfig, "--model is required");
    if (cfg.format != "json" && cfg.format != "csv")
      fail(ErrorCode::BadConfig, "--format must be json or csv");
    if (c_compute->parsed()) return cmd_compute(cfg);
    if (c_verify->parsed()) return cmd_verify(cfg);
    if (c_export->parsed()) return cmd_export(cfg);
    return kExitConfig;
  } catch (const VerifyFail& f) {
    std::cerr << "verify: FAIL: " << f.what << "\n";
    return kExitVerifyFail;
  } catch (const TauliftError& e) {
    std::cerr << "error [" << error_name(e.code()) << "]: " << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::BadConfig:
      case ErrorCode::BadParams:
      case ErrorCode::UnknownModel:
        return kExitConfig;
      default:
        return kExitSolver;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  }
}
