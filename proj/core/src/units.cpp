#include "zmd/units.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

namespace zmd::units {

double parse_length(const std::string& text) {
  std::string s = text;
  // trim ascii whitespace
  size_t b = s.find_first_not_of(" \t");
  size_t e = s.find_last_not_of(" \t");
  if (b == std::string::npos) throw InvalidInput("parse_length: empty value");
  s = s.substr(b, e - b + 1);

  double scale = 0;
  size_t cut = 0;
  if (s.size() > 2 && s.compare(s.size() - 2, 2, "nm") == 0) {
    scale = 1e-9;
    cut = 2;
  } else if (s.size() > 2 && s.compare(s.size() - 2, 2, "um") == 0) {
    scale = 1e-6;
    cut = 2;
  } else if (s.size() > 2 && s.compare(s.size() - 2, 2, "mm") == 0) {
    scale = 1e-3;
    cut = 2;
  } else if (s.size() > 1 && s.back() == 'm') {
    scale = 1.0;
    cut = 1;
  } else {
    throw InvalidInput("parse_length: missing unit suffix (nm/um/mm/m) in '" + text + "'");
  }
  std::string num = s.substr(0, s.size() - cut);
  char* endp = nullptr;
  double v = std::strtod(num.c_str(), &endp);
  if (endp == num.c_str() || *endp != '\0' || !std::isfinite(v))
    throw InvalidInput("parse_length: bad number in '" + text + "'");
  return v * scale;
}

std::string format_length(double meters) {
  std::ostringstream os;
  os.precision(15);
  double a = std::abs(meters);
  if (a > 0 && a < 1e-6)
    os << meters * 1e9 << "nm";
  else if (a > 0 && a < 1e-3)
    os << meters * 1e6 << "um";
  else
    os << meters << "m";
  return os.str();
}

}  // namespace zmd::units
