#include "ecmtk/table_io.hpp"

#include <array>
#include <istream>
#include <optional>
#include <ostream>

#include "ecmtk/csv.hpp"
#include "ecmtk/errors.hpp"

namespace ecmtk {

namespace {

constexpr std::array kComponents{RcComponent::RSeries, RcComponent::R1, RcComponent::R2,
                                 RcComponent::C1, RcComponent::C2};

}  // namespace

SocParameterTable load_parameter_table(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> soc_col;
  std::array<std::optional<std::size_t>, 5> cols;
  bool have_header = false;
  std::vector<double> socs;
  std::vector<RcParameters> rows;

  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view trimmed = csv::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const auto fields = csv::split(trimmed);
    if (!have_header) {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        const std::string_view name = csv::trim(fields[i]);
        if (name == "SOC") soc_col = i;
        for (std::size_t c = 0; c < kComponents.size(); ++c) {
          if (name == component_name(kComponents[c])) cols[c] = i;
        }
      }
      if (!soc_col) throw ParseError(line_no, "missing column 'SOC'");
      for (std::size_t c = 0; c < kComponents.size(); ++c) {
        if (!cols[c]) {
          throw ParseError(line_no,
                           "missing column '" + std::string(component_name(kComponents[c])) + "'");
        }
      }
      have_header = true;
      continue;
    }
    const auto value = [&](std::size_t col) {
      double v = 0.0;
      if (col >= fields.size() || !csv::parse_double(fields[col], v)) {
        throw ParseError(line_no, "non-numeric or missing value in column " + std::to_string(col + 1));
      }
      return v;
    };
    socs.push_back(value(*soc_col));
    RcParameters p;
    for (std::size_t c = 0; c < kComponents.size(); ++c) set(p, kComponents[c], value(*cols[c]));
    rows.push_back(p);
  }
  if (!have_header) throw ParseError(line_no, "no header row");
  return SocParameterTable(std::move(socs), std::move(rows));
}

void write_parameter_table(std::ostream& out, const SocParameterTable& table,
                           std::span<const std::string> comments) {
  csv::write_comments(out, comments);
  out << "SOC,R_s,R_1,R_2,C_1,C_2\n";
  for (std::size_t i = 0; i < table.size(); ++i) {
    const RcParameters& p = table.row(i);
    const double row[] = {table.breakpoints()[i], p.r_series, p.r1, p.r2, p.c1, p.c2};
    csv::write_row(out, row);
  }
}

}  // namespace ecmtk
