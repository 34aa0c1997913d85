#pragma once

#include <string>

#include "zmd/image.hpp"

namespace zmd::units {

/// Parses a length with a mandatory unit suffix: "550nm", "2um", "0.5e-6m".
/// Bare numbers are rejected so config files stay unambiguous.
double parse_length(const std::string& text);

/// Renders meters with the most readable suffix (nm, um or m).
std::string format_length(double meters);

}  // namespace zmd::units
