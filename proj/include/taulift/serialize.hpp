#pragma once

#include <string>

#include "taulift/biseries.hpp"
#include "taulift/fock.hpp"
#include "taulift/zseries.hpp"

namespace taulift {

// JSON series schema: {var, parity, window, terms:[{exp|exps, h_exp, num, den}]}
// with num/den as decimal strings. Output is deterministic (sorted terms).
std::string json_zseries(const std::string& var, const ZSeries& x);
std::string json_biseries(const std::string& var, const BiSeries& x);
std::string json_affine(const std::string& var, const BogoliubovKP& b);
std::string json_affine(const std::string& var, const BogoliubovBKP& a);

// CSV coefficient tables, header i,j,h_exp,num,den, rows sorted
// lexicographically by (i, j, h_exp).
std::string csv_affine(const BogoliubovKP& b);
std::string csv_affine(const BogoliubovBKP& a);
std::string csv_zseries(const ZSeries& x);
std::string csv_biseries(const BiSeries& x);

// Write via a temporary file + rename, so readers never see partial output.
void atomic_write(const std::string& path, const std::string& content);

}  // namespace taulift
