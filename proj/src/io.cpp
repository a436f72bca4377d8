#include "hkflow/io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "hkflow/errors.hpp"

namespace hkflow {

namespace {

std::vector<double> parse_row(const std::string& line) {
  std::vector<double> vals;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t used = 0;
    try {
      vals.push_back(std::stod(cell, &used));
    } catch (const std::exception&) {
      fail(ErrorKind::Io, "non-numeric cell '" + cell + "'");
    }
    if (cell.find_first_not_of(" \t\r", used) != std::string::npos) fail(ErrorKind::Io, "trailing text in cell '" + cell + "'");
  }
  return vals;
}

// Skips the header, returns numeric rows of exactly `width` columns.
std::vector<std::vector<double>> read_table(std::istream& is, std::size_t width) {
  std::string line;
  if (!std::getline(is, line)) fail(ErrorKind::Io, "empty table");
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto r = parse_row(line);
    if (r.size() != width)
      fail(ErrorKind::Io, "row " + std::to_string(rows.size() + 1) + " has " + std::to_string(r.size()) +
                              " columns, expected " + std::to_string(width));
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_phase_field_csv(std::ostream& os, const SurfaceFamily& family,
                           std::span<const std::pair<double, double>> grid, const HyperkahlerStructure& s) {
  os << "u,v,lambda1,lambda2,lambda3,e_del,e_delbar,detdJ,margin\n";
  for (const auto& [u, v] : grid) {
    const PhaseDifferential pd = phase_differential(family, u, v, s);
    const PhaseSample& p = pd.sample;
    const double vals[] = {u, v, p.lambda[0], p.lambda[1], p.lambda[2], p.e_del, p.e_delbar, p.detdJ,
                           distance_to_forbidden(p.lambda)};
    for (std::size_t k = 0; k < std::size(vals); ++k) os << (k ? "," : "") << format_double(vals[k]);
    os << '\n';
  }
}

void write_trajectory_record(std::ostream& os, double t, const FlowStats& stats, double margin) {
  os << "{\"t\":" << format_double(t) << ",\"max_B\":" << format_double(stats.max_B)
     << ",\"max_H\":" << format_double(stats.max_H) << ",\"area\":" << format_double(stats.area)
     << ",\"margin\":" << format_double(margin) << "}\n";
}

void write_curve_csv(std::ostream& os, const PlaneCurve& curve) {
  os << "x,re,im\n";
  for (int j = 0; j < curve.size(); ++j) {
    const cplx z = curve.samples()[j];
    os << format_double(curve.param(j)) << ',' << format_double(z.real()) << ',' << format_double(z.imag()) << '\n';
  }
}

PlaneCurve read_curve_csv(std::istream& is) {
  std::vector<cplx> z;
  for (const auto& r : read_table(is, 3)) z.emplace_back(r[1], r[2]);
  return PlaneCurve(std::move(z));
}

void write_jet_samples_csv(std::ostream& os, std::span<const SurfaceJet> jets) {
  const char* names[] = {"X", "Xu", "Xv", "Xuu", "Xuv", "Xvv"};
  for (int f = 0; f < 6; ++f)
    for (int c = 1; c <= 4; ++c) os << (f || c > 1 ? "," : "") << names[f] << c;
  os << '\n';
  for (const SurfaceJet& j : jets) {
    const Vec4* fields[] = {&j.X, &j.Xu, &j.Xv, &j.Xuu, &j.Xuv, &j.Xvv};
    for (int f = 0; f < 6; ++f)
      for (int c = 0; c < 4; ++c) os << (f || c ? "," : "") << format_double((*fields[f])[c]);
    os << '\n';
  }
}

std::vector<SurfaceJet> read_jet_samples_csv(std::istream& is) {
  std::vector<SurfaceJet> out;
  for (const auto& r : read_table(is, 24)) {
    SurfaceJet j;
    Vec4* fields[] = {&j.X, &j.Xu, &j.Xv, &j.Xuu, &j.Xuv, &j.Xvv};
    for (int f = 0; f < 6; ++f) *fields[f] = Vec4(r[4 * f], r[4 * f + 1], r[4 * f + 2], r[4 * f + 3]);
    out.push_back(j);
  }
  return out;
}

}  // namespace hkflow
