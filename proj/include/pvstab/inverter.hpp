#pragma once

#include <optional>
#include <string>

#include "pvstab/poly.hpp"

namespace pvstab {

/// Physical and control parameters of one grid-connected PV inverter with an
/// LCL output filter, PR current control, capacitor-current active damping,
/// and a digitally delayed modulator.
struct InverterParams {
  double kp = 0.0;       ///< proportional gain
  double kr = 0.0;       ///< resonant gain
  double kd = 0.0;       ///< active-damping coefficient
  double omega0 = 0.0;   ///< fundamental angular frequency [rad/s]
  double omega_i = 0.0;  ///< resonant cutoff angular frequency [rad/s]
  double Vdc = 0.0;      ///< dc-bus voltage [V]
  double L1 = 0.0;       ///< inverter-side inductance [H]
  double L2 = 0.0;       ///< grid-side inductance [H]
  double Cf = 0.0;       ///< filter capacitance [F]
  double Ts = 0.0;       ///< sampling period [s]
  /// Explicit total loop delay [s]; when unset the delay is
  /// (lambda + 0.5) * Ts (computation plus ZOH average). An explicit value
  /// is how non-multiple-of-Ts sweeps are realized.
  std::optional<double> Td;
  double lambda = 1.0;  ///< computation-delay coefficient in (0, 1]
  double fsw = 0.0;     ///< switching frequency [Hz]; metadata only

  /// Throws InputError listing every violated constraint.
  void validate() const;

  double kpwm() const { return Vdc / 2.0; }          // sinusoidal PWM gain
  double omega_r() const;                            // 1/sqrt(L2 Cf)
  double omega_res() const;                          // LCL resonance
  double total_delay() const;                        // Td or (lambda+0.5) Ts
};

/// Reference-to-current channel G and output admittance Yeq of one inverter
/// seen at its filter output. The two share one denominator, coefficient by
/// coefficient.
struct InverterChannelModel {
  RationalFunction G;
  RationalFunction Yeq;
};

/// Norton equivalent behind the split-winding transformer leg: current
/// source gain per unit reference plus shunt admittance, both seen from the
/// plant bus.
struct NortonModel {
  RationalFunction ipv_gain;
  RationalFunction Ypv;
  double LT = 0.0;  ///< transformer leakage inductance per winding [H]
};

/// PR controller kp + 2 kr omega_i s / (s^2 + 2 omega_i s + omega0^2).
RationalFunction build_controller(const InverterParams& p);

/// Second-order Pade model of the total loop delay.
RationalFunction build_delay_chain(const InverterParams& p);

/// Closed-loop channel pair (G, Yeq) of a single inverter. The shared
/// denominator is L1 s^3 + kd Gs s^2 + L1 omega_res^2 s + Gs Gc omega_r^2
/// with Gs = kpwm * (Pade delay); independent block-diagram elimination puts
/// omega_r (not omega_res) in the numerator and constant-term positions.
InverterChannelModel build_channel_model(const InverterParams& p);

/// Norton pair ipv_gain = G / (Yeq LT s + 1), Ypv = Yeq / (Yeq LT s + 1),
/// assembled structurally in lowest terms (the reconstruction identities
/// hold as exact rational identities). Throws InputError for LT <= 0.
NortonModel build_norton(const InverterChannelModel& m, double LT);

/// Per-winding leakage inductance of a double split-winding transformer from
/// its short-circuit ratings: (Uz/100 * U^2 / S) / omega0.
double derive_split_winding_leakage(double S_winding_VA, double U_winding_V,
                                    double Uz_pct, double omega0);

struct DelayMarginOptions {
  /// When true the classified poles are those of the Norton current gain
  /// (transformer leakage included); the default classifies the inverter's
  /// own channel poles, which is the reading the margin figure calibrates
  /// against. Both are exposed because the source text is ambiguous.
  bool include_transformer = false;
  double LT = 0.0;  ///< required when include_transformer is true [H]
};

struct DelayMarginResult {
  bool crossed = false;    ///< false: stable throughout the swept range
  double margin_s = 0.0;   ///< first delay with a pole real part >= 0
  double resolution_s = 0.0;
  double swept_max_s = 0.0;
};

/// Sweeps the total delay over [Td_min, Td_max] in the given step,
/// classifying single-inverter poles at each value, and refines the first
/// crossing by bisection to 0.01 us. The range must lie within [0, 5 Ts].
DelayMarginResult delay_margin(const InverterParams& p, double Td_min,
                               double Td_max, double step,
                               const DelayMarginOptions& opt = {});

}  // namespace pvstab
