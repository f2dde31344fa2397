#include "pvstab/timesim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>
#include <vector>

#include "pvstab/errors.hpp"
#include "pvstab/kernels.hpp"

namespace pvstab {

void SimConfig::validate() const {
  std::vector<std::string> bad;
  if (!(duration_s > 0.0) || !std::isfinite(duration_s))
    bad.push_back("duration_s must be strictly positive");
  if (substeps_per_Ts < 4)
    bad.push_back("substeps_per_Ts must be at least 4");
  if (reference_amplitude_A < 0.0 || !std::isfinite(reference_amplitude_A))
    bad.push_back("reference_amplitude_A must be >= 0");
  if (grid_rms_V < 0.0 || !std::isfinite(grid_rms_V))
    bad.push_back("grid_rms_V must be >= 0");
  if (!(divergence_window_s > 0.0) || !std::isfinite(divergence_window_s))
    bad.push_back("divergence_window_s must be strictly positive");
  if (!(divergence_factor > 1.0))
    bad.push_back("divergence_factor must exceed 1");
  if (std::isfinite(duration_s) && std::isfinite(divergence_window_s) &&
      duration_s < 2.0 * divergence_window_s)
    bad.push_back("duration_s must cover at least two divergence windows");
  if (!bad.empty()) {
    std::string msg = "invalid simulation settings:";
    for (const auto& b : bad) msg += " " + b + ";";
    throw InputError(msg);
  }
}

StateSpace build_statespace(const SystemModel& m) {
  StateSpace ss;
  ss.Rg = m.grid.Rg;
  ss.Lg = m.grid.Lg;

  int off = 0;
  for (const auto& e : m.entries) {
    StateSpace::Entry se;
    se.params = e.params;
    se.LT = e.LT;
    se.count = e.count;
    se.offset = off;
    se.dim = e.state_dim;
    off += se.dim;
    ss.entries.push_back(se);
  }
  ss.dim = off;

  ss.omega0 = ss.entries.front().params.omega0;
  ss.Ts_min = ss.entries.front().params.Ts;
  for (const auto& e : ss.entries) {
    if (e.params.omega0 != ss.omega0)
      throw InputError(
          "build_statespace: all groups must share the fundamental frequency");
    ss.Ts_min = std::min(ss.Ts_min, e.params.Ts);
  }

  for (const auto& g : m.groups) {
    ss.group_labels.push_back(g.label);
    ss.group_entry.push_back(
        static_cast<int>(m.entry_of_label.at(g.label)));
  }

  // Shared bus voltage: eliminating v_pcc from the grid branch equation
  // couples every entry through one dense row.
  double den_fac = 1.0;
  for (const auto& e : ss.entries)
    den_fac += ss.Lg * e.count / (e.params.L2 + e.LT);
  ss.vpcc_x.assign(static_cast<std::size_t>(ss.dim), 0.0);
  ss.vpcc_ug = 1.0 / den_fac;
  for (const auto& e : ss.entries) {
    const double Lb = e.params.L2 + e.LT;
    ss.vpcc_x[static_cast<std::size_t>(e.offset) + 1] =
        ss.Lg * e.count / (Lb * den_fac);
    ss.vpcc_x[static_cast<std::size_t>(e.offset) + 2] =
        ss.Rg * e.count / den_fac;
  }

  const std::size_t n = static_cast<std::size_t>(ss.dim);
  ss.A.assign(n * n, 0.0);
  ss.B_iref.assign(n, 0.0);
  ss.B_ug.assign(n, 0.0);
  const auto at = [&](int r, int c) -> double& {
    return ss.A[static_cast<std::size_t>(r) * n + static_cast<std::size_t>(c)];
  };

  for (const auto& e : ss.entries) {
    const InverterParams& p = e.params;
    const int o = e.offset;
    const double kpwm = p.kpwm();
    const double Td = p.total_delay();
    const bool delayed = e.dim == 7;
    const double Lb = p.L2 + e.LT;

    // States per entry: [i1, uC, i2, xc1, xc2, (xd1, xd2)].
    const int i1 = o, uC = o + 1, i2 = o + 2, xc1 = o + 3, xc2 = o + 4;
    const int xd1 = o + 5, xd2 = o + 6;

    // Modulator command before the delay: kp e + 2 kr wi xc2 - kd (i1 - i2),
    // homogeneous part only (the reference lands in B).
    std::vector<double> upre(n, 0.0);
    upre[static_cast<std::size_t>(i2)] += -p.kp + p.kd;
    upre[static_cast<std::size_t>(i1)] += -p.kd;
    upre[static_cast<std::size_t>(xc2)] += 2.0 * p.kr * p.omega_i;

    std::vector<double> uinv(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) uinv[j] = kpwm * upre[j];
    if (delayed) uinv[static_cast<std::size_t>(xd2)] += -kpwm * 12.0 / Td;

    for (std::size_t j = 0; j < n; ++j)
      at(i1, static_cast<int>(j)) += uinv[j] / p.L1;
    at(i1, uC) += -1.0 / p.L1;

    at(uC, i1) += 1.0 / p.Cf;
    at(uC, i2) += -1.0 / p.Cf;

    at(i2, uC) += 1.0 / Lb;
    for (std::size_t j = 0; j < n; ++j)
      at(i2, static_cast<int>(j)) -= ss.vpcc_x[j] / Lb;

    at(xc1, xc2) += 1.0;
    at(xc2, xc1) += -p.omega0 * p.omega0;
    at(xc2, xc2) += -2.0 * p.omega_i;
    at(xc2, i2) += -1.0;

    if (delayed) {
      at(xd1, xd2) += 1.0;
      at(xd2, xd1) += -12.0 / (Td * Td);
      at(xd2, xd2) += -6.0 / Td;
      for (std::size_t j = 0; j < n; ++j)
        at(xd2, static_cast<int>(j)) += upre[j];
    }

    ss.B_iref[static_cast<std::size_t>(xc2)] += 1.0;
    ss.B_iref[static_cast<std::size_t>(i1)] += kpwm * p.kp / p.L1;
    if (delayed) ss.B_iref[static_cast<std::size_t>(xd2)] += p.kp;
    ss.B_ug[static_cast<std::size_t>(i2)] += -ss.vpcc_ug / Lb;
  }
  return ss;
}

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

bool all_finite(const std::vector<double>& x) {
  for (double v : x)
    if (!std::isfinite(v)) return false;
  return true;
}

void record_sample(const StateSpace& ss, Waveform& w, double t,
                   const std::vector<double>& x, double ug) {
  w.t.push_back(t);
  for (std::size_t g = 0; g < ss.group_labels.size(); ++g) {
    const auto& e = ss.entries[static_cast<std::size_t>(ss.group_entry[g])];
    w.i_s[g].push_back(x[static_cast<std::size_t>(e.offset) + 2]);
  }
  const double vp =
      kern::dot(x.size(), ss.vpcc_x.data(), x.data()) + ss.vpcc_ug * ug;
  w.v_pcc.push_back(vp);
}

}  // namespace

Waveform run_linear(const StateSpace& ss, const SimConfig& cfg) {
  cfg.validate();
  if (ss.dim <= 0) throw InputError("run_linear: empty state space");

  const std::size_t n = static_cast<std::size_t>(ss.dim);
  const double h = ss.Ts_min / cfg.substeps_per_Ts;
  const long long nsteps =
      std::max<long long>(1, std::llround(cfg.duration_s / h));
  const double amp = cfg.reference_amplitude_A;
  const double ug_amp = kSqrt2 * cfg.grid_rms_V;

  const auto deriv = [&](double t, const std::vector<double>& x,
                         std::vector<double>& dx) {
    kern::matvec(ss.A.data(), n, n, x.data(), dx.data());
    const double s = std::sin(ss.omega0 * t);
    kern::axpy(n, amp * s, ss.B_iref.data(), dx.data());
    kern::axpy(n, ug_amp * s, ss.B_ug.data(), dx.data());
  };

  Waveform w;
  w.group_labels = ss.group_labels;
  w.i_s.assign(ss.group_labels.size(), {});
  const std::size_t reserve = static_cast<std::size_t>(nsteps) + 1;
  w.t.reserve(reserve);
  w.v_pcc.reserve(reserve);
  for (auto& col : w.i_s) col.reserve(reserve);

  std::vector<double> x(n, 0.0), k1(n), k2(n), k3(n), k4(n), tmp(n);
  record_sample(ss, w, 0.0, x, 0.0);

  for (long long j = 1; j <= nsteps; ++j) {
    const double t0 = static_cast<double>(j - 1) * h;
    deriv(t0, x, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
    deriv(t0 + 0.5 * h, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
    deriv(t0 + 0.5 * h, tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
    deriv(t0 + h, tmp, k4);
    for (std::size_t i = 0; i < n; ++i)
      x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

    const double t = static_cast<double>(j) * h;
    if (!all_finite(x)) {
      w.diverged = true;
      w.diverged_at = t;
      break;
    }
    record_sample(ss, w, t, x, ug_amp * std::sin(ss.omega0 * t));
  }
  return w;
}

Waveform run_sampled(const StateSpace& ss, const SimConfig& cfg) {
  cfg.validate();
  if (ss.dim <= 0) throw InputError("run_sampled: empty state space");

  // Discrete controller per entry: prewarped-Tustin resonant term in
  // transposed direct form II plus the proportional and damping taps taken
  // at the sample instants. Commands take effect total_delay - Ts/2 after
  // their sample (the remaining half sample is the modulator average).
  struct Ctl {
    double Ts = 0.0;
    double lam_eff = 0.0;  // actuation delay in sample periods
    double bn0 = 0.0, an1 = 0.0, an2 = 0.0;
    double z1 = 0.0, z2 = 0.0;
    double kp = 0.0, kd = 0.0, kpwm = 0.0;
    long long next_sample = 0;
    std::deque<std::pair<double, double>> pending;  // (time, inverter volts)
    double u_inv = 0.0;
    int off3 = 0;
    double L1 = 0.0, Cf = 0.0, Lb = 0.0;
    double count = 0.0;
  };

  std::vector<Ctl> ctls;
  double den_fac = 1.0;
  for (std::size_t k = 0; k < ss.entries.size(); ++k) {
    const auto& e = ss.entries[k];
    const InverterParams& p = e.params;
    Ctl c;
    c.Ts = p.Ts;
    const double Td = p.total_delay();
    c.lam_eff = Td / p.Ts - 0.5;
    if (c.lam_eff < 0.0)
      throw InputError(
          "run_sampled: total delay must be at least half a sample period");
    const double K = p.omega0 / std::tan(p.omega0 * p.Ts / 2.0);
    const double a0 = K * K + 2.0 * p.omega_i * K + p.omega0 * p.omega0;
    c.bn0 = 2.0 * p.kr * p.omega_i * K / a0;
    c.an1 = (-2.0 * K * K + 2.0 * p.omega0 * p.omega0) / a0;
    c.an2 = (K * K - 2.0 * p.omega_i * K + p.omega0 * p.omega0) / a0;
    c.kp = p.kp;
    c.kd = p.kd;
    c.kpwm = p.kpwm();
    c.off3 = static_cast<int>(3 * k);
    c.L1 = p.L1;
    c.Cf = p.Cf;
    c.Lb = p.L2 + e.LT;
    c.count = static_cast<double>(e.count);
    den_fac += ss.Lg * c.count / c.Lb;
    ctls.push_back(c);
  }

  const std::size_t n3 = 3 * ss.entries.size();
  const double amp = cfg.reference_amplitude_A;
  const double ug_amp = kSqrt2 * cfg.grid_rms_V;
  const double h_rec = ss.Ts_min / cfg.substeps_per_Ts;
  const long long n_rec =
      std::max<long long>(1, std::llround(cfg.duration_s / h_rec));

  const auto vpcc_of = [&](const std::vector<double>& x, double ug) {
    double acc = ug;
    for (const auto& c : ctls) {
      const std::size_t o = static_cast<std::size_t>(c.off3);
      acc += ss.Rg * c.count * x[o + 2] + ss.Lg * c.count * x[o + 1] / c.Lb;
    }
    return acc / den_fac;
  };
  const auto deriv = [&](double t, const std::vector<double>& x,
                         std::vector<double>& dx) {
    const double vp = vpcc_of(x, ug_amp * std::sin(ss.omega0 * t));
    for (const auto& c : ctls) {
      const std::size_t o = static_cast<std::size_t>(c.off3);
      dx[o] = (c.u_inv - x[o + 1]) / c.L1;
      dx[o + 1] = (x[o] - x[o + 2]) / c.Cf;
      dx[o + 2] = (x[o + 1] - vp) / c.Lb;
    }
  };

  Waveform w;
  w.group_labels = ss.group_labels;
  w.i_s.assign(ss.group_labels.size(), {});

  const auto record = [&](double t, const std::vector<double>& x) {
    w.t.push_back(t);
    for (std::size_t g = 0; g < ss.group_labels.size(); ++g) {
      const auto& c = ctls[static_cast<std::size_t>(ss.group_entry[g])];
      w.i_s[g].push_back(x[static_cast<std::size_t>(c.off3) + 2]);
    }
    w.v_pcc.push_back(vpcc_of(x, ug_amp * std::sin(ss.omega0 * t)));
  };

  std::vector<double> x(n3, 0.0), k1(n3), k2(n3), k3(n3), k4(n3), tmp(n3);
  constexpr double kTieEps = 1e-12;  // groups index-derived event instants
  double t_cur = 0.0;
  long long next_rec = 0;

  for (;;) {
    double t_evt = std::numeric_limits<double>::infinity();
    for (const auto& c : ctls) {
      t_evt = std::min(t_evt, static_cast<double>(c.next_sample) * c.Ts);
      if (!c.pending.empty()) t_evt = std::min(t_evt, c.pending.front().first);
    }
    if (next_rec <= n_rec)
      t_evt = std::min(t_evt, static_cast<double>(next_rec) * h_rec);
    if (next_rec > n_rec) break;

    if (t_evt > t_cur) {
      const double h = t_evt - t_cur;
      deriv(t_cur, x, k1);
      for (std::size_t i = 0; i < n3; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
      deriv(t_cur + 0.5 * h, tmp, k2);
      for (std::size_t i = 0; i < n3; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
      deriv(t_cur + 0.5 * h, tmp, k3);
      for (std::size_t i = 0; i < n3; ++i) tmp[i] = x[i] + h * k3[i];
      deriv(t_cur + h, tmp, k4);
      for (std::size_t i = 0; i < n3; ++i)
        x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      t_cur = t_evt;
      if (!all_finite(x)) {
        w.diverged = true;
        w.diverged_at = t_cur;
        break;
      }
    }

    // Samples strictly before actuations at shared instants.
    for (auto& c : ctls) {
      while (static_cast<double>(c.next_sample) * c.Ts <= t_cur + kTieEps) {
        const double ts = static_cast<double>(c.next_sample) * c.Ts;
        const std::size_t o = static_cast<std::size_t>(c.off3);
        const double e = amp * std::sin(ss.omega0 * ts) - x[o + 2];
        const double iC = x[o] - x[o + 2];
        const double yr = c.bn0 * e + c.z1;
        c.z1 = -c.an1 * yr + c.z2;
        c.z2 = -c.bn0 * e - c.an2 * yr;
        const double u_cmd = c.kp * e + yr - c.kd * iC;
        c.pending.emplace_back(
            (static_cast<double>(c.next_sample) + c.lam_eff) * c.Ts,
            c.kpwm * u_cmd);
        ++c.next_sample;
      }
    }
    for (auto& c : ctls) {
      while (!c.pending.empty() && c.pending.front().first <= t_cur + kTieEps) {
        c.u_inv = c.pending.front().second;
        c.pending.pop_front();
      }
    }
    while (next_rec <= n_rec &&
           static_cast<double>(next_rec) * h_rec <= t_cur + kTieEps) {
      record(static_cast<double>(next_rec) * h_rec, x);
      ++next_rec;
    }
  }
  return w;
}

Waveform simulate(const StateSpace& ss, const SimConfig& cfg) {
  return cfg.mode == SimMode::Sampled ? run_sampled(ss, cfg)
                                      : run_linear(ss, cfg);
}

SimVerdict detect_stability(const Waveform& w, const SimConfig& cfg) {
  cfg.validate();
  SimVerdict v;
  v.group_labels = w.group_labels;
  if (w.diverged) {
    v.outcome = SimOutcome::Unstable;
    v.diverged = true;
    v.diverged_at = w.diverged_at;
    return v;
  }
  if (w.t.size() < 2) throw InputError("detect_stability: waveform too short");
  const double dur = w.t.back();
  const double W = cfg.divergence_window_s;
  if (dur < 2.0 * W)
    throw InputError(
        "detect_stability: waveform must cover two divergence windows");
  const double tb = std::min(0.1 * dur, dur - 2.0 * W);

  const auto rms_in = [&](const std::vector<double>& y, double t0, double t1) {
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < w.t.size(); ++i) {
      if (w.t[i] >= t0 - 1e-12 && w.t[i] <= t1 + 1e-12) {
        acc += y[i] * y[i];
        ++count;
      }
    }
    return count ? std::sqrt(acc / static_cast<double>(count)) : 0.0;
  };

  bool any_unstable = false;
  bool any_signal = false;
  for (const auto& y : w.i_s) {
    const double base = rms_in(y, tb, tb + W);
    const double fin = rms_in(y, dur - W, dur);
    v.baseline_rms.push_back(base);
    v.final_rms.push_back(fin);
    if (!std::isfinite(base) || !std::isfinite(fin)) {
      any_unstable = true;
      continue;
    }
    if (base > 0.0 || fin > 0.0) any_signal = true;
    if (base == 0.0) {
      if (fin > 0.0) any_unstable = true;
    } else if (fin > cfg.divergence_factor * base) {
      any_unstable = true;
    }
  }
  v.outcome = any_unstable
                  ? SimOutcome::Unstable
                  : (any_signal ? SimOutcome::Stable
                                : SimOutcome::Indeterminate);
  return v;
}

const char* to_string(SimOutcome o) {
  switch (o) {
    case SimOutcome::Stable:
      return "stable";
    case SimOutcome::Unstable:
      return "unstable";
    case SimOutcome::Indeterminate:
      return "indeterminate";
  }
  return "indeterminate";
}

}  // namespace pvstab
