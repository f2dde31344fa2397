#include "pvstab/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pvstab/errors.hpp"

namespace pvstab {

namespace {

bool dominance_order(const std::complex<double>& a,
                     const std::complex<double>& b) {
  if (a.real() != b.real()) return a.real() > b.real();
  return a.imag() < b.imag();
}

StabilityVerdict classify_roots(const PoleSet& poles, double margin_tol) {
  StabilityVerdict v;
  v.margin_tol = margin_tol;
  v.max_real = -std::numeric_limits<double>::infinity();
  for (const auto& z : poles.values) v.max_real = std::max(v.max_real, z.real());
  v.stable = v.max_real < -margin_tol;
  v.marginal = std::abs(v.max_real) <= margin_tol;
  const double band = 1e-9 * std::max(1.0, std::abs(v.max_real));
  for (const auto& z : poles.values)
    if (z.real() >= v.max_real - band) v.dominant.push_back(z);
  std::sort(v.dominant.begin(), v.dominant.end(), dominance_order);
  return v;
}

// Classify one raw sweep evaluation, tagging failures with the count.
StabilityVerdict verdict_at_count(const Polynomial& raw, int expected_degree,
                                  double margin_tol, int count) {
  if (raw.degree() != expected_degree) {
    std::ostringstream os;
    os << "count " << count << ": characteristic polynomial degree "
       << raw.degree() << " does not match the state dimension "
       << expected_degree;
    throw EngineError(os.str());
  }
  try {
    return classify_roots(poly_roots((1.0 / raw.leading()) * raw), margin_tol);
  } catch (const EngineError& e) {
    std::ostringstream os;
    os << "count " << count << ": " << e.what();
    throw EngineError(os.str());
  }
}

void check_margin_tol(double margin_tol) {
  if (margin_tol < 0.0 || !std::isfinite(margin_tol))
    throw InputError("margin_tol must be finite and >= 0");
}

}  // namespace

StabilityVerdict classify(const Polynomial& char_poly, double margin_tol) {
  check_margin_tol(margin_tol);
  return classify_roots(poly_roots(char_poly), margin_tol);
}

std::vector<StabilityVerdict> sweep_counts(const SystemModel& m,
                                           const std::string& swept_label,
                                           const std::vector<int>& counts,
                                           double margin_tol) {
  check_margin_tol(margin_tol);
  for (int n : counts)
    if (n < 1 || n > 10000)
      throw InputError("sweep_counts: counts must lie in [1, 10000]");
  const CharPolyAffine affine = char_poly_affine(m, swept_label);
  const int dim = m.state_dim();
  std::vector<StabilityVerdict> out;
  out.reserve(counts.size());
  for (int n : counts)
    out.push_back(verdict_at_count(affine.at(n), dim, margin_tol, n));
  return out;
}

StabilityRange find_ranges(const SystemModel& m,
                           const std::string& swept_label, int n_max,
                           double margin_tol) {
  check_margin_tol(margin_tol);
  if (n_max < 1 || n_max > 10000)
    throw InputError("find_ranges: n_max must lie in [1, 10000]");
  if (!m.entry_of_label.count(swept_label))
    throw InputError("find_ranges: unknown group label: " + swept_label);

  StabilityRange r;
  r.swept_label = swept_label;
  r.n_max = n_max;
  r.margin_tol = margin_tol;
  for (const auto& g : m.groups)
    if (g.label != swept_label) r.fixed_counts.emplace(g.label, g.count);

  // Exhaustive sweep: the stable set can be disconnected, so every count in
  // [1, n_max] is evaluated rather than bisected.
  const CharPolyAffine affine = char_poly_affine(m, swept_label);
  const int dim = m.state_dim();
  std::vector<char> stable(static_cast<std::size_t>(n_max) + 1, 0);
  for (int n = 1; n <= n_max; ++n)
    stable[static_cast<std::size_t>(n)] =
        verdict_at_count(affine.at(n), dim, margin_tol, n).stable ? 1 : 0;

  r.first_unstable = n_max + 1;
  r.last_unstable = 0;
  for (int n = 1; n <= n_max; ++n) {
    if (!stable[static_cast<std::size_t>(n)]) {
      r.first_unstable = std::min(r.first_unstable, n);
      r.last_unstable = n;
    }
  }

  for (int n = 1; n <= n_max; ++n) {
    if (!stable[static_cast<std::size_t>(n)]) continue;
    int hi = n;
    while (hi + 1 <= n_max && stable[static_cast<std::size_t>(hi) + 1]) ++hi;
    r.stable_intervals.emplace_back(n, hi);
    n = hi;
  }

  // Re-verify every boundary with fresh, non-affine evaluations.
  const auto fresh = [&](int n) {
    return verdict_at_count(char_poly_raw(m, swept_label, n), dim, margin_tol,
                            n);
  };
  for (int n = 1; n < n_max; ++n) {
    const bool a = stable[static_cast<std::size_t>(n)] != 0;
    const bool b = stable[static_cast<std::size_t>(n) + 1] != 0;
    if (a == b) continue;
    RangeBoundary bd;
    bd.stable_side = a ? n : n + 1;
    bd.unstable_side = a ? n + 1 : n;
    const StabilityVerdict vs = fresh(bd.stable_side);
    const StabilityVerdict vu = fresh(bd.unstable_side);
    if (!vs.stable || vu.stable) {
      std::ostringstream os;
      os << "boundary re-verification failed between counts " << n << " and "
         << n + 1;
      throw EngineError(os.str());
    }
    bd.max_real_stable = vs.max_real;
    bd.max_real_unstable = vu.max_real;
    r.boundaries.push_back(bd);
  }
  return r;
}

std::vector<StabilityRange> delay_sweep(const SystemModel& m,
                                        const std::string& swept_label,
                                        const std::vector<double>& delays_s,
                                        int n_max, double margin_tol) {
  if (!m.entry_of_label.count(swept_label))
    throw InputError("delay_sweep: unknown group label: " + swept_label);
  for (double d : delays_s)
    if (d < 0.0 || !std::isfinite(d))
      throw InputError("delay_sweep: delays must be finite and >= 0");

  std::vector<StabilityRange> out;
  out.reserve(delays_s.size());
  for (double d : delays_s) {
    std::vector<PlantGroup> groups = m.groups;
    for (auto& g : groups)
      if (g.label == swept_label) g.params.Td = d;
    const SystemModel swept = compose(groups, m.grid);
    out.push_back(find_ranges(swept, swept_label, n_max, margin_tol));
  }
  return out;
}

PoleLocus locus_trace(const SystemModel& m, const std::string& swept_label,
                      int count_min, int count_max, int top_k) {
  if (count_min < 1 || count_max < count_min || count_max > 10000)
    throw InputError("locus_trace: need 1 <= count_min <= count_max <= 10000");
  if (top_k < 1 || top_k > m.state_dim())
    throw InputError("locus_trace: top_k must lie in [1, state dimension]");

  PoleLocus locus;
  locus.swept_label = swept_label;
  locus.count_min = count_min;
  locus.count_max = count_max;
  locus.top_k = top_k;

  const CharPolyAffine affine = char_poly_affine(m, swept_label);
  const int dim = m.state_dim();

  struct Branch {
    int id;
    std::complex<double> last;
  };
  std::vector<Branch> active;
  int next_id = 1;

  for (int n = count_min; n <= count_max; ++n) {
    const Polynomial raw = affine.at(n);
    if (raw.degree() != dim) {
      std::ostringstream os;
      os << "count " << n << ": characteristic polynomial degree "
         << raw.degree() << " does not match the state dimension " << dim;
      throw EngineError(os.str());
    }
    PoleSet poles = poly_roots((1.0 / raw.leading()) * raw);
    std::sort(poles.values.begin(), poles.values.end(), dominance_order);
    const std::size_t k =
        std::min<std::size_t>(static_cast<std::size_t>(top_k),
                              poles.values.size());
    std::vector<std::complex<double>> top(poles.values.begin(),
                                          poles.values.begin() +
                                              static_cast<std::ptrdiff_t>(k));

    // Greedy globally-nearest matching against the previous count's poles.
    std::vector<int> ids(top.size(), 0);
    std::vector<char> pole_used(top.size(), 0);
    std::vector<char> branch_used(active.size(), 0);
    for (std::size_t round = 0; round < std::min(top.size(), active.size());
         ++round) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t bi = 0, bj = 0;
      bool found = false;
      for (std::size_t i = 0; i < active.size(); ++i) {
        if (branch_used[i]) continue;
        for (std::size_t j = 0; j < top.size(); ++j) {
          if (pole_used[j]) continue;
          const double d = std::abs(top[j] - active[i].last);
          if (d < best) {
            best = d;
            bi = i;
            bj = j;
            found = true;
          }
        }
      }
      if (!found) break;
      branch_used[bi] = 1;
      pole_used[bj] = 1;
      ids[bj] = active[bi].id;
    }
    for (std::size_t j = 0; j < top.size(); ++j)
      if (!pole_used[j]) ids[j] = next_id++;

    // Nearly coincident poles share a branch id and are reported.
    for (std::size_t a = 0; a < top.size(); ++a) {
      for (std::size_t b = a + 1; b < top.size(); ++b) {
        if (std::abs(top[a] - top[b]) <=
            1e-6 * std::max(1.0, std::abs(top[a]))) {
          if (ids[b] != ids[a]) {
            std::ostringstream os;
            os << "count " << n << ": poles nearly coincide at ("
               << top[a].real() << ", " << top[a].imag()
               << "); sharing branch id " << ids[a];
            locus.warnings.push_back(os.str());
            ids[b] = ids[a];
          }
        }
      }
    }

    std::vector<std::size_t> order(top.size());
    for (std::size_t j = 0; j < top.size(); ++j) order[j] = j;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });

    active.clear();
    for (std::size_t j : order) {
      LocusRow row;
      row.count = n;
      row.branch_id = ids[j];
      row.pole = top[j];
      locus.rows.push_back(row);
      bool seen = false;
      for (const auto& br : active)
        if (br.id == ids[j]) seen = true;
      if (!seen) active.push_back(Branch{ids[j], top[j]});
    }
  }
  return locus;
}

}  // namespace pvstab
