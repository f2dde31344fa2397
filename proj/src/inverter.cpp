#include "pvstab/inverter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "pvstab/errors.hpp"

namespace pvstab {

void InverterParams::validate() const {
  std::vector<std::string> bad;
  const auto pos = [&](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      std::ostringstream m;
      m << name << " must be strictly positive (got " << v << ")";
      bad.push_back(m.str());
    }
  };
  pos(kp, "kp");
  pos(kr, "kr");
  pos(kd, "kd");
  pos(omega0, "omega0");
  pos(omega_i, "omega_i");
  pos(Vdc, "Vdc");
  pos(L1, "L1");
  pos(L2, "L2");
  pos(Cf, "Cf");
  pos(Ts, "Ts");
  if (Td && (!(*Td >= 0.0) || !std::isfinite(*Td)))
    bad.push_back("Td must be >= 0 when set");
  if (!(lambda > 0.0) || lambda > 1.0)
    bad.push_back("lambda must lie in (0, 1]");
  if (!bad.empty()) {
    std::string msg = "invalid inverter parameters:";
    for (const auto& b : bad) msg += " " + b + ";";
    throw InputError(msg);
  }
}

double InverterParams::omega_r() const { return 1.0 / std::sqrt(L2 * Cf); }

double InverterParams::omega_res() const {
  return std::sqrt((L1 + L2) / (L1 * L2 * Cf));
}

double InverterParams::total_delay() const {
  return Td ? *Td : (lambda + 0.5) * Ts;
}

RationalFunction build_controller(const InverterParams& p) {
  p.validate();
  // kp + 2 kr wi s / (s^2 + 2 wi s + w0^2), over the common denominator.
  const Polynomial den({p.omega0 * p.omega0, 2.0 * p.omega_i, 1.0});
  const Polynomial num =
      p.kp * den + Polynomial({0.0, 2.0 * p.kr * p.omega_i});
  return RationalFunction::from(num, den);
}

RationalFunction build_delay_chain(const InverterParams& p) {
  p.validate();
  return pade_delay(p.total_delay());
}

InverterChannelModel build_channel_model(const InverterParams& p) {
  p.validate();
  const double kpwm = p.kpwm();
  const double wr2 = 1.0 / (p.L2 * p.Cf);
  const double wres2 = (p.L1 + p.L2) / (p.L1 * p.L2 * p.Cf);

  const Polynomial c({p.omega0 * p.omega0, 2.0 * p.omega_i, 1.0});
  const Polynomial ncg = p.kp * c + Polynomial({0.0, 2.0 * p.kr * p.omega_i});
  const RationalFunction gd = pade_delay(p.total_delay());
  const Polynomial& nd = gd.num;
  const Polynomial& pd = gd.den;

  const Polynomial s = Polynomial::term(1.0, 1);
  const Polynomial s2 = Polynomial::term(1.0, 2);
  const Polynomial s3 = Polynomial::term(1.0, 3);

  const Polynomial D = p.L1 * (s3 * pd * c) + (p.kd * kpwm) * (s2 * nd * c) +
                       (p.L1 * wres2) * (s * pd * c) +
                       (kpwm * wr2) * (nd * ncg);
  const Polynomial nG = (kpwm * wr2) * (nd * ncg);
  const Polynomial nY = (p.L1 / p.L2) * (s2 * pd * c) +
                        (p.kd * kpwm / p.L2) * (s * nd * c) +
                        wr2 * (pd * c);

  return InverterChannelModel{RationalFunction::from(nG, D),
                              RationalFunction::from(nY, D)};
}

NortonModel build_norton(const InverterChannelModel& m, double LT) {
  if (!(LT > 0.0) || !std::isfinite(LT))
    throw InputError("build_norton: LT must be strictly positive");
  if (!(m.G.den == m.Yeq.den))
    throw EngineError(
        "build_norton: channel pair does not share one denominator");
  // ipv = G / (Yeq LT s + 1) = nG / E and Ypv = nY / E with
  // E = LT s nY + D: the shared factor D is cancelled structurally rather
  // than numerically, keeping the Norton pair in lowest terms.
  const Polynomial& D = m.G.den;
  const Polynomial& nG = m.G.num;
  const Polynomial& nY = m.Yeq.num;
  const Polynomial E = LT * (Polynomial::term(1.0, 1) * nY) + D;
  return NortonModel{RationalFunction::from(nG, E),
                     RationalFunction::from(nY, E), LT};
}

double derive_split_winding_leakage(double S_winding_VA, double U_winding_V,
                                    double Uz_pct, double omega0) {
  if (!(S_winding_VA > 0.0) || !(U_winding_V > 0.0) || !(Uz_pct > 0.0) ||
      !(omega0 > 0.0))
    throw InputError(
        "derive_split_winding_leakage: ratings must be strictly positive");
  const double Z = (Uz_pct / 100.0) * U_winding_V * U_winding_V / S_winding_VA;
  return Z / omega0;
}

namespace {

double max_real_at(InverterParams p, double Td,
                   const DelayMarginOptions& opt) {
  p.Td = Td;
  const InverterChannelModel m = build_channel_model(p);
  const Polynomial den =
      opt.include_transformer ? build_norton(m, opt.LT).ipv_gain.den
                              : m.G.den;
  const PoleSet poles = poly_roots(den);
  double mr = -std::numeric_limits<double>::infinity();
  for (const auto& z : poles.values) mr = std::max(mr, z.real());
  return mr;
}

}  // namespace

DelayMarginResult delay_margin(const InverterParams& p, double Td_min,
                               double Td_max, double step,
                               const DelayMarginOptions& opt) {
  p.validate();
  if (!(step > 0.0)) throw InputError("delay_margin: step must be positive");
  if (Td_min < 0.0 || !(Td_max > Td_min) || Td_max > 5.0 * p.Ts)
    throw InputError("delay_margin: range must lie within [0, 5 Ts]");
  if (opt.include_transformer && !(opt.LT > 0.0))
    throw InputError("delay_margin: include_transformer requires LT > 0");

  constexpr double kResolution = 0.01e-6;  // bisection target width [s]

  DelayMarginResult res;
  res.resolution_s = kResolution;
  res.swept_max_s = Td_max;

  double prev_td = Td_min;
  double prev_mr = max_real_at(p, Td_min, opt);
  if (prev_mr >= 0.0) {
    res.crossed = true;
    res.margin_s = Td_min;
    return res;
  }
  for (double td = Td_min + step;; td += step) {
    if (td > Td_max) td = Td_max;
    const double mr = max_real_at(p, td, opt);
    if (mr >= 0.0) {
      double lo = prev_td, hi = td;
      while (hi - lo > kResolution) {
        const double mid = 0.5 * (lo + hi);
        (max_real_at(p, mid, opt) >= 0.0 ? hi : lo) = mid;
      }
      res.crossed = true;
      res.margin_s = 0.5 * (lo + hi);
      return res;
    }
    prev_td = td;
    prev_mr = mr;
    if (td >= Td_max) break;
  }
  (void)prev_mr;
  res.crossed = false;  // stable throughout the swept range
  res.margin_s = Td_max;
  return res;
}

}  // namespace pvstab
