#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hkflow/curve.hpp"
#include "hkflow/flow.hpp"
#include "hkflow/phase_map.hpp"

namespace hkflow {

/// Round-trip formatting used by every machine-readable output: %.17g.
std::string format_double(double x);

/// One row per grid point: u,v,lambda1,lambda2,lambda3,e_del,e_delbar,detdJ,margin.
void write_phase_field_csv(std::ostream& os, const SurfaceFamily& family,
                           std::span<const std::pair<double, double>> grid, const HyperkahlerStructure& s);

/// {"t":..,"max_B":..,"max_H":..,"area":..,"margin":..} followed by a newline.
void write_trajectory_record(std::ostream& os, double t, const FlowStats& stats, double margin);

/// Header x,re,im then one row per sample.
void write_curve_csv(std::ostream& os, const PlaneCurve& curve);
/// Reads the format above; only the re and im columns are used.
PlaneCurve read_curve_csv(std::istream& is);

/// Jets as 24 columns X1..X4,Xu1..Xu4,Xv1..Xv4,Xuu1..Xuu4,Xuv1..Xuv4,Xvv1..Xvv4.
void write_jet_samples_csv(std::ostream& os, std::span<const SurfaceJet> jets);
std::vector<SurfaceJet> read_jet_samples_csv(std::istream& is);

}  // namespace hkflow
