#pragma once

#include <iosfwd>
#include <span>
#include <string>

#include "ecmtk/ecm.hpp"

namespace ecmtk {

/// Parameter tables as CSV with the header SOC,R_s,R_1,R_2,C_1,C_2 (ohm and
/// farad). Lines starting with '#' are skipped. Columns may come in any order.
SocParameterTable load_parameter_table(std::istream& in);

void write_parameter_table(std::ostream& out, const SocParameterTable& table,
                           std::span<const std::string> comments = {});

}  // namespace ecmtk
