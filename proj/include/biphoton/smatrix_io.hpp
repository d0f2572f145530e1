#pragma once

#include <iosfwd>
#include <string>

#include "biphoton/solver.hpp"

namespace biphoton {

// Binary dump of one ScatteringMatrix, all fields little-endian:
//
//   offset  type              content
//   0       char[4]           magic "BSMX"
//   4       uint32            format version (1)
//   8       float64           k
//   16      uint64            n_rows (detection angles)
//   24      uint64            n_cols (incident directions)
//   32      float64           grid phi
//   40      float64[n_rows]   grid thetas (radians)
//   ...     float64[2*n_cols] incident (theta, phi) pairs (radians)
//   ...     float64[2]        t-matrix (re, im)
//   ...     float64[2*n_rows*n_cols]  amplitudes, row-major, (re, im) pairs

void write_smatrix(std::ostream& os, ScatteringMatrix const& s);
ScatteringMatrix read_smatrix(std::istream& is);

void save_smatrix(std::string const& path, ScatteringMatrix const& s);
ScatteringMatrix load_smatrix(std::string const& path);

} // namespace biphoton
