#include "taulift/hscalar.hpp"

#include <sstream>

namespace taulift {

std::string HScalar::str() const {
  std::ostringstream os;
  bool first = true;
  for (const auto& [e, c] : terms_) {
    Rat cc = c;
    if (!first) os << (cc < 0 ? " - " : " + ");
    if (first && cc < 0) os << "-";
    first = false;
    Rat mag = abs(cc);
    mpq_class m(mag);
    if (e == 0 || m != 1) os << m.get_str();
    if (e != 0) {
      if (m != 1) os << "*";
      os << "h";
      if (e != 1) os << "^" << e;
    }
  }
  if (first) os << "0";
  if (trunc_ != kTruncInf) os << " + O(h^" << (trunc_ + 1) << ")";
  return os.str();
}

}  // namespace taulift
