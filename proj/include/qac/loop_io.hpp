#pragma once

#include <iosfwd>
#include <string>

#include "qac/loops.hpp"

namespace qac {

// Text record, bit-exact through hexadecimal floating point:
//
//   qac-loops 1
//   beta <hexfloat>
//   slices <P>
//   extents <n_1> ... <n_d>
//   boundary <free|plus_clamped|minus_clamped> <hexfloat c>
//   values
//   <P hexfloats>            one line per site, row-major site order
//   end
void write_configuration(std::ostream& out, const LoopConfiguration& config);
LoopConfiguration read_configuration(std::istream& in);

std::string hexfloat(double v);
double parse_double(const std::string& text);

}  // namespace qac
