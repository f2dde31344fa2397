#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "pvstab/inverter.hpp"
#include "pvstab/poly.hpp"

namespace pvstab {

// --- grid impedance -------------------------------------------------------

enum class GridMode { Direct, Ratings };

struct GridDirect {
  double Rg_ohm = 0.0;
  double Lg_H = 0.0;
};

// Step-up transformer and HV line ratings, referred down to the inverter
// base voltage.  The line runs on the high-voltage side; the transformer
// short-circuit impedance is evaluated on its low-voltage side.
struct GridRatings {
  double S_stepup_VA = 0.0;
  double Us_pct = 0.0;  // transformer short-circuit voltage, percent
  double U_H_V = 0.0;   // line-side (high) rated voltage
  double U_L_V = 0.0;   // transformer low-side rated voltage
  double r_line_ohm_per_km = 0.0;
  double x_line_ohm_per_km = 0.0;
  double length_km = 0.0;
  double base_voltage_V = 0.0;  // voltage level the result is referred to
  double Lg_scale = 1.0;        // calibration multiplier on the inductance
};

struct GridParams {
  GridMode mode = GridMode::Direct;
  GridDirect direct;
  GridRatings ratings;
};

struct GridImpedance {
  double Rg = 0.0;  // ohm
  double Lg = 0.0;  // henry
  std::vector<std::string> trace;  // human-readable referral steps
};

// Resolve grid parameters to a series R-L impedance at the inverter base.
// omega0 converts reactance to inductance in ratings mode.
GridImpedance resolve_grid(const GridParams& g, double omega0);

// Y_g(s) = 1 / (Rg + Lg s).  Requires Lg > 0 (enforced by resolve_grid).
RationalFunction grid_admittance(const GridImpedance& g);

// --- plant composition ----------------------------------------------------

struct PlantGroup {
  std::string label;
  InverterParams params;
  double LT = 0.0;  // per-inverter transformer leakage, henry
  int count = 1;
};

// One distinct (parameter set, LT) entry.  Groups whose parameters agree
// exactly are merged here; `count` is the aggregate and `labels` lists the
// contributing group labels in composition order.
struct SystemEntry {
  InverterParams params;
  double LT = 0.0;
  int count = 0;
  std::vector<std::string> labels;
  NortonModel norton;  // nG / E and nY / E
  Polynomial nG;
  Polynomial nY;
  Polynomial E;
  int state_dim = 0;  // per replica: 5, plus 2 when the delay is modelled
};

struct SystemModel {
  std::vector<PlantGroup> groups;  // original order preserved
  GridImpedance grid;
  std::vector<SystemEntry> entries;
  std::map<std::string, std::size_t> entry_of_label;
  RationalFunction delta;  // Y_g + sum_k N_k Ypv_k over (Rg + Lg s) prod E_j

  int state_dim() const;
  const SystemEntry& entry_for(const std::string& label) const;
};

SystemModel compose(const std::vector<PlantGroup>& groups,
                    const GridImpedance& grid);

// --- closed-loop responses ------------------------------------------------

enum class Drive { OwnRef, GridVoltage, CrossRef };

// Transfer function from the selected drive to one replica's injected
// current in the entry containing `label`.  OwnRef drives the shared
// reference of that entry; CrossRef drives the reference of the entry
// containing `cross_label`, which must be a different entry.
RationalFunction channel_tf(const SystemModel& m, const std::string& label,
                            Drive drive, const std::string& cross_label = "");

// Monic characteristic polynomial of the interconnected system.  Its degree
// equals the total state dimension; a mismatch raises EngineError.
Polynomial characteristic_polynomial(const SystemModel& m);

// Raw (non-monic) characteristic numerator with one group's count replaced.
Polynomial char_poly_raw(const SystemModel& m, const std::string& swept_label,
                         int count);

// The characteristic numerator is affine in any single group count:
// P(n) = A0 + n * B0.  Evaluating through this form keeps count sweeps cheap.
struct CharPolyAffine {
  Polynomial A0;
  Polynomial B0;
  Polynomial at(int count) const;
};

CharPolyAffine char_poly_affine(const SystemModel& m,
                                const std::string& swept_label);

}  // namespace pvstab
