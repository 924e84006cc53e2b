#pragma once

#include "ecmtk/cell.hpp"
#include "ecmtk/ecm.hpp"
#include "ecmtk/hppc.hpp"

namespace ecmtk::reference {

// Energizer Ultimate Lithium AA (LiFeS2): 3000 mAh, 1.5 V nominal, 0.8 V
// cutoff, 14.5 x 50.5 mm.
CellSpec lifes2_aa_cell();

// Fifth-order OCV fit of the AA cell, 1.35 V empty to 1.59 V full.
OcvPolynomial lifes2_ocv();

// 20-breakpoint identified table, SOC 0.05 to 1.00.
SocParameterTable lifes2_parameters();

// C/2 square-wave pulses: 1.5 A, 2.8 mHz, 50 % duty, 0.4 Sa/s, 4 h.
HppcProfileSpec half_c_hppc();

// Default SOC grid for identification: 0.05, 0.10, ..., 1.00.
std::vector<double> default_breakpoints(std::size_t count = 20);

}  // namespace ecmtk::reference
