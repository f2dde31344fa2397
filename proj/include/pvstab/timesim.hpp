#pragma once

#include <string>
#include <vector>

#include "pvstab/system.hpp"

namespace pvstab {

enum class SimMode { PadeLinear, Sampled };

struct SimConfig {
  SimMode mode = SimMode::PadeLinear;
  double duration_s = 0.5;
  int substeps_per_Ts = 10;
  double reference_amplitude_A = 1.0;
  double grid_rms_V = 156.0;
  double divergence_window_s = 0.2;
  double divergence_factor = 10.0;
  void validate() const;
};

// Dense linear model of the composed plant: one replica state block per
// distinct entry (identical replicas share their trajectory exactly, so the
// reduction is lossless).  Inputs are the shared current reference and the
// grid voltage; v_pcc is reconstructed as an output row.
struct StateSpace {
  int dim = 0;
  std::vector<double> A;       // dim x dim, row-major
  std::vector<double> B_iref;  // dim
  std::vector<double> B_ug;    // dim
  std::vector<double> vpcc_x;  // dim
  double vpcc_ug = 0.0;

  struct Entry {
    InverterParams params;
    double LT = 0.0;
    int count = 0;
    int offset = 0;  // first state index of this entry's block
    int dim = 0;     // 5, plus 2 when the delay is modelled
  };
  std::vector<Entry> entries;

  std::vector<std::string> group_labels;  // original composition order
  std::vector<int> group_entry;           // entry index per group label

  double Rg = 0.0;
  double Lg = 0.0;
  double omega0 = 0.0;
  double Ts_min = 0.0;
};

StateSpace build_statespace(const SystemModel& m);

struct Waveform {
  std::vector<double> t;
  std::vector<std::string> group_labels;
  std::vector<std::vector<double>> i_s;  // per group, aligned with t
  std::vector<double> v_pcc;
  bool diverged = false;
  double diverged_at = 0.0;
};

// Integrate the continuous (delay-rationalised) model with classic RK4 at a
// fixed step of Ts_min / substeps_per_Ts, recording every step.
Waveform run_linear(const StateSpace& ss, const SimConfig& cfg);

// Sampled-controller simulation: the plant stays continuous while each
// entry's controller runs in discrete time with a prewarped-Tustin resonant
// term and an actuation delay of total_delay - Ts/2 after each sample.
Waveform run_sampled(const StateSpace& ss, const SimConfig& cfg);

Waveform simulate(const StateSpace& ss, const SimConfig& cfg);

enum class SimOutcome { Stable, Unstable, Indeterminate };

struct SimVerdict {
  SimOutcome outcome = SimOutcome::Indeterminate;
  std::vector<std::string> group_labels;
  std::vector<double> baseline_rms;
  std::vector<double> final_rms;
  bool diverged = false;
  double diverged_at = 0.0;
};

// Sliding-window RMS comparison: unstable when any group's final-window RMS
// exceeds divergence_factor times its baseline-window RMS (or the run
// diverged); indeterminate when every channel is identically zero.
SimVerdict detect_stability(const Waveform& w, const SimConfig& cfg);

const char* to_string(SimOutcome o);

}  // namespace pvstab
