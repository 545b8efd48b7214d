#include "taulift/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace taulift {

namespace {

using Json = nlohmann::ordered_json;

std::string exp_str(Half e) {
  Rat r = e.as_rat();
  mpq_class m(r);
  return m.get_str();
}

Json term_obj(int h_exp, const Rat& c) {
  Json t;
  t["h_exp"] = h_exp;
  t["num"] = rat_num_str(c);
  t["den"] = rat_den_str(c);
  return t;
}

}  // namespace

std::string json_zseries(const std::string& var, const ZSeries& x) {
  Json j;
  j["var"] = var;
  j["parity"] = x.parity() == Parity::Integer ? "integer" : "half-odd";
  j["window"] = Json::array({exp_str(x.lo()), exp_str(x.top_or_lo())});
  Json terms = Json::array();
  for (const auto& [e, c] : x.terms())
    for (const auto& [h, q] : c.terms()) {
      Json t = term_obj(h, q);
      t["exp"] = exp_str(e);
      terms.push_back(std::move(t));
    }
  j["terms"] = std::move(terms);
  return j.dump(2) + "\n";
}

std::string json_biseries(const std::string& var, const BiSeries& x) {
  Json j;
  j["var"] = var;
  j["parity"] = "integer";
  j["window"] = Json::array({x.ulo(), x.uhi(), x.vlo(), x.vhi()});
  Json terms = Json::array();
  for (int a = x.ulo(); a <= x.uhi(); ++a)
    for (int b = x.vlo(); b <= x.vhi(); ++b) {
      HScalar c = x.at(a, b);
      for (const auto& [h, q] : c.terms()) {
        Json t = term_obj(h, q);
        t["exps"] = Json::array({a, b});
        terms.push_back(std::move(t));
      }
    }
  j["terms"] = std::move(terms);
  return j.dump(2) + "\n";
}

namespace {

template <typename M>
std::string json_affine_impl(const std::string& var, const M& m, int rows, int cols) {
  Json j;
  j["var"] = var;
  j["parity"] = "integer";
  j["window"] = Json::array({0, rows - 1, 0, cols - 1});
  Json terms = Json::array();
  for (int i = 0; i < rows; ++i)
    for (int k = 0; k < cols; ++k) {
      HScalar c = m.entry(i, k);
      for (const auto& [h, q] : c.terms()) {
        Json t = term_obj(h, q);
        t["exps"] = Json::array({i, k});
        terms.push_back(std::move(t));
      }
    }
  j["terms"] = std::move(terms);
  return j.dump(2) + "\n";
}

template <typename M>
std::string csv_affine_impl(const M& m, int rows, int cols) {
  std::ostringstream os;
  os << "i,j,h_exp,num,den\n";
  for (int i = 0; i < rows; ++i)
    for (int k = 0; k < cols; ++k) {
      HScalar c = m.entry(i, k);
      for (const auto& [h, q] : c.terms())
        os << i << "," << k << "," << h << "," << rat_num_str(q) << "," << rat_den_str(q) << "\n";
    }
  return os.str();
}

}  // namespace

std::string json_affine(const std::string& var, const BogoliubovKP& b) {
  return json_affine_impl(var, b, b.rows(), b.cols());
}
std::string json_affine(const std::string& var, const BogoliubovBKP& a) {
  return json_affine_impl(var, a, a.size(), a.size());
}
std::string csv_affine(const BogoliubovKP& b) { return csv_affine_impl(b, b.rows(), b.cols()); }
std::string csv_affine(const BogoliubovBKP& a) { return csv_affine_impl(a, a.size(), a.size()); }

std::string csv_zseries(const ZSeries& x) {
  std::ostringstream os;
  os << "i,j,h_exp,num,den\n";
  for (const auto& [e, c] : x.terms())
    for (const auto& [h, q] : c.terms())
      os << exp_str(e) << ",0," << h << "," << rat_num_str(q) << "," << rat_den_str(q) << "\n";
  return os.str();
}

std::string csv_biseries(const BiSeries& x) {
  std::ostringstream os;
  os << "i,j,h_exp,num,den\n";
  for (int a = x.ulo(); a <= x.uhi(); ++a)
    for (int b = x.vlo(); b <= x.vhi(); ++b) {
      HScalar c = x.at(a, b);
      for (const auto& [h, q] : c.terms())
        os << a << "," << b << "," << h << "," << rat_num_str(q) << "," << rat_den_str(q) << "\n";
    }
  return os.str();
}

void atomic_write(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) fail(ErrorCode::BadConfig, "cannot open output file " + tmp);
    f << content;
    if (!f.good()) fail(ErrorCode::BadConfig, "write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    fail(ErrorCode::BadConfig, "rename failed for " + path);
}

}  // namespace taulift
