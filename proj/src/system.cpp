#include "pvstab/system.hpp"

#include <array>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "pvstab/errors.hpp"

namespace pvstab {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

GridImpedance resolve_grid(const GridParams& g, double omega0) {
  GridImpedance out;
  if (g.mode == GridMode::Direct) {
    if (g.direct.Rg_ohm < 0.0 || !std::isfinite(g.direct.Rg_ohm))
      throw InputError("grid: Rg_ohm must be >= 0");
    if (!(g.direct.Lg_H > 0.0) || !std::isfinite(g.direct.Lg_H))
      throw InputError("grid: Lg_H must be strictly positive");
    out.Rg = g.direct.Rg_ohm;
    out.Lg = g.direct.Lg_H;
    out.trace.push_back("direct: Rg=" + fmt(out.Rg) + " ohm, Lg=" +
                        fmt(out.Lg) + " H");
    return out;
  }

  const GridRatings& r = g.ratings;
  if (!(omega0 > 0.0)) throw InputError("grid: omega0 must be positive");
  const auto pos = [](double v, const char* n) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw InputError(std::string("grid ratings: ") + n +
                       " must be strictly positive");
  };
  pos(r.S_stepup_VA, "S_stepup_VA");
  pos(r.Us_pct, "Us_pct");
  pos(r.U_H_V, "U_H_V");
  pos(r.U_L_V, "U_L_V");
  pos(r.base_voltage_V, "base_voltage_V");
  pos(r.Lg_scale, "Lg_scale");
  if (r.r_line_ohm_per_km < 0.0 || r.x_line_ohm_per_km < 0.0 ||
      r.length_km < 0.0)
    throw InputError("grid ratings: line parameters must be >= 0");

  // Transformer short-circuit reactance evaluated on the low-voltage side.
  const double X_T = (r.Us_pct / 100.0) * r.U_L_V * r.U_L_V / r.S_stepup_VA;
  // Line impedance lives on the high-voltage side; refer it down.
  const double k_hv = (r.U_H_V / r.U_L_V) * (r.U_H_V / r.U_L_V);
  const double R_line = r.r_line_ohm_per_km * r.length_km / k_hv;
  const double X_line = r.x_line_ohm_per_km * r.length_km / k_hv;
  // Refer the low-voltage-side total to the requested base.
  const double k_base =
      (r.base_voltage_V / r.U_L_V) * (r.base_voltage_V / r.U_L_V);

  out.Rg = R_line * k_base;
  const double Lg_raw = (X_T + X_line) * k_base / omega0;
  out.Lg = Lg_raw * r.Lg_scale;
  if (!(out.Lg > 0.0))
    throw InputError("grid ratings: resolved Lg is not positive");

  out.trace.push_back("transformer: X_T=" + fmt(X_T) + " ohm at " +
                      fmt(r.U_L_V) + " V");
  out.trace.push_back("line referred to " + fmt(r.U_L_V) +
                      " V: R=" + fmt(R_line) + " ohm, X=" + fmt(X_line) +
                      " ohm");
  out.trace.push_back("referred to base " + fmt(r.base_voltage_V) +
                      " V: Rg=" + fmt(out.Rg) + " ohm, Lg_raw=" +
                      fmt(Lg_raw) + " H");
  out.trace.push_back("Lg_scale=" + fmt(r.Lg_scale) + ": Lg=" + fmt(out.Lg) +
                      " H");
  return out;
}

RationalFunction grid_admittance(const GridImpedance& g) {
  if (!(g.Lg > 0.0) || g.Rg < 0.0)
    throw DomainError("grid admittance requires Rg >= 0 and Lg > 0");
  return RationalFunction::from(Polynomial::constant(1.0),
                                Polynomial({g.Rg, g.Lg}));
}

namespace {

// Distinct-entry key: every parameter that shapes the per-replica dynamics.
// The switching frequency is metadata and the raw Td/lambda split collapses
// to the effective total delay.
using EntryKey = std::array<double, 13>;

EntryKey key_of(const PlantGroup& g) {
  const InverterParams& p = g.params;
  return {p.kp,  p.kr, p.kd, p.omega0, p.omega_i,        p.Vdc, p.L1,
          p.L2,  p.Cf, p.Ts, p.lambda, p.total_delay(),  g.LT};
}

Polynomial char_numerator(const SystemModel& m,
                          const std::vector<double>& counts) {
  const Polynomial zg({m.grid.Rg, m.grid.Lg});
  const std::size_t n = m.entries.size();
  Polynomial acc = Polynomial::constant(1.0);
  for (const auto& e : m.entries) acc = acc * e.E;
  for (std::size_t k = 0; k < n; ++k) {
    Polynomial term = counts[k] * (zg * m.entries[k].nY);
    for (std::size_t j = 0; j < n; ++j)
      if (j != k) term = term * m.entries[j].E;
    acc = acc + term;
  }
  return acc;
}

std::vector<double> aggregate_counts(const SystemModel& m) {
  std::vector<double> c;
  c.reserve(m.entries.size());
  for (const auto& e : m.entries) c.push_back(static_cast<double>(e.count));
  return c;
}

}  // namespace

int SystemModel::state_dim() const {
  int d = 0;
  for (const auto& e : entries) d += e.state_dim;
  return d;
}

const SystemEntry& SystemModel::entry_for(const std::string& label) const {
  const auto it = entry_of_label.find(label);
  if (it == entry_of_label.end())
    throw InputError("unknown group label: " + label);
  return entries[it->second];
}

SystemModel compose(const std::vector<PlantGroup>& groups,
                    const GridImpedance& grid) {
  if (groups.empty()) throw InputError("compose: at least one group required");
  if (!(grid.Lg > 0.0) || grid.Rg < 0.0)
    throw InputError("compose: grid impedance requires Rg >= 0 and Lg > 0");

  SystemModel m;
  m.groups = groups;
  m.grid = grid;

  std::map<EntryKey, std::size_t> index;
  for (const auto& g : groups) {
    if (g.label.empty()) throw InputError("compose: group label is empty");
    if (g.count < 1)
      throw InputError("compose: group '" + g.label + "' needs count >= 1");
    g.params.validate();
    if (!(g.LT > 0.0))
      throw InputError("compose: group '" + g.label + "' needs LT > 0");
    if (m.entry_of_label.count(g.label))
      throw InputError("compose: duplicate group label '" + g.label + "'");

    const EntryKey key = key_of(g);
    auto it = index.find(key);
    if (it == index.end()) {
      SystemEntry e;
      e.params = g.params;
      e.LT = g.LT;
      e.count = 0;
      const InverterChannelModel ch = build_channel_model(g.params);
      e.norton = build_norton(ch, g.LT);
      e.nG = e.norton.ipv_gain.num;
      e.nY = e.norton.Ypv.num;
      e.E = e.norton.ipv_gain.den;
      e.state_dim = 5 + (g.params.total_delay() > 0.0 ? 2 : 0);
      m.entries.push_back(std::move(e));
      it = index.emplace(key, m.entries.size() - 1).first;
    }
    SystemEntry& e = m.entries[it->second];
    e.count += g.count;
    e.labels.push_back(g.label);
    m.entry_of_label.emplace(g.label, it->second);
  }

  const Polynomial zg({grid.Rg, grid.Lg});
  Polynomial den = zg;
  for (const auto& e : m.entries) den = den * e.E;
  m.delta = RationalFunction::from(char_numerator(m, aggregate_counts(m)),
                                   den);
  return m;
}

RationalFunction channel_tf(const SystemModel& m, const std::string& label,
                            Drive drive, const std::string& cross_label) {
  const auto it = m.entry_of_label.find(label);
  if (it == m.entry_of_label.end())
    throw InputError("channel_tf: unknown group label: " + label);
  const std::size_t i = it->second;
  const SystemEntry& ei = m.entries[i];
  const Polynomial& num_delta = m.delta.num;
  const Polynomial zg({m.grid.Rg, m.grid.Lg});

  const auto prod_excluding = [&](std::size_t a, std::size_t b) {
    Polynomial p = Polynomial::constant(1.0);
    for (std::size_t j = 0; j < m.entries.size(); ++j)
      if (j != a && j != b) p = p * m.entries[j].E;
    return p;
  };

  switch (drive) {
    case Drive::OwnRef: {
      const Polynomial coupling =
          static_cast<double>(ei.count) * (zg * ei.nY * prod_excluding(i, i));
      return RationalFunction::from(ei.nG * (num_delta - coupling),
                                    ei.E * num_delta);
    }
    case Drive::GridVoltage: {
      return RationalFunction::from(-1.0 * (ei.nY * prod_excluding(i, i)),
                                    num_delta);
    }
    case Drive::CrossRef: {
      if (cross_label.empty())
        throw InputError("channel_tf: CrossRef requires a driving label");
      const auto jt = m.entry_of_label.find(cross_label);
      if (jt == m.entry_of_label.end())
        throw InputError("channel_tf: unknown driving label: " + cross_label);
      const std::size_t p = jt->second;
      if (p == i)
        throw InputError(
            "channel_tf: CrossRef driving label resolves to the observed "
            "entry; references are shared per distinct parameter set");
      const SystemEntry& ep = m.entries[p];
      const Polynomial num = static_cast<double>(ep.count) *
                             (zg * ei.nY * ep.nG * prod_excluding(i, p));
      return RationalFunction::from(-1.0 * num, num_delta);
    }
  }
  throw InputError("channel_tf: unknown drive");
}

Polynomial characteristic_polynomial(const SystemModel& m) {
  Polynomial raw = char_numerator(m, aggregate_counts(m));
  if (raw.degree() != m.state_dim()) {
    std::ostringstream os;
    os << "characteristic polynomial degree " << raw.degree()
       << " does not match the state dimension " << m.state_dim();
    throw EngineError(os.str());
  }
  // Divide rather than multiply by the reciprocal so the result is exactly
  // monic (lead / lead == 1.0; a rounded reciprocal is ulps away from it).
  std::vector<double> monic = raw.coeffs();
  const double lead = raw.leading();
  for (double& c : monic) c /= lead;
  return Polynomial(std::move(monic));
}

Polynomial char_poly_raw(const SystemModel& m, const std::string& swept_label,
                         int count) {
  if (count < 0) throw InputError("char_poly_raw: count must be >= 0");
  const auto it = m.entry_of_label.find(swept_label);
  if (it == m.entry_of_label.end())
    throw InputError("char_poly_raw: unknown group label: " + swept_label);

  // Recompute entry aggregates with the swept group's own count replaced.
  std::vector<double> counts(m.entries.size(), 0.0);
  for (const auto& g : m.groups) {
    const std::size_t e = m.entry_of_label.at(g.label);
    counts[e] += (g.label == swept_label) ? static_cast<double>(count)
                                          : static_cast<double>(g.count);
  }
  return char_numerator(m, counts);
}

Polynomial CharPolyAffine::at(int count) const {
  return A0 + static_cast<double>(count) * B0;
}

CharPolyAffine char_poly_affine(const SystemModel& m,
                                const std::string& swept_label) {
  const Polynomial p1 = char_poly_raw(m, swept_label, 1);
  const Polynomial p2 = char_poly_raw(m, swept_label, 2);
  CharPolyAffine a;
  a.B0 = p2 + (-1.0 * p1);
  a.A0 = 2.0 * p1 + (-1.0 * p2);
  return a;
}

}  // namespace pvstab
