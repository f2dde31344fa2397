#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pvstab/config.hpp"
#include "pvstab/errors.hpp"
#include "pvstab/inverter.hpp"
#include "pvstab/report.hpp"
#include "pvstab/stability.hpp"
#include "pvstab/system.hpp"
#include "pvstab/timesim.hpp"

namespace {

using pvstab::report::Json;

struct CliState {
  std::string config_path;
  std::vector<std::string> sets;
};

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw pvstab::IoError("cannot read config file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  if (f.bad()) throw pvstab::IoError("cannot read config file: " + path);
  return ss.str();
}

pvstab::RunConfig load_config(const CliState& s) {
  std::string text = s.config_path.empty() ? "{}" : slurp(s.config_path);
  for (const auto& assignment : s.sets)
    text = pvstab::apply_override(text, assignment);
  return pvstab::parse_config_text(text);
}

bool wants(const pvstab::RunConfig& cfg, const char* format) {
  return std::find(cfg.output.formats.begin(), cfg.output.formats.end(),
                   format) != cfg.output.formats.end();
}

std::string run_hash(const pvstab::RunConfig& cfg) {
  return pvstab::report::hex64(
      pvstab::report::fnv1a64(pvstab::canonical_config(cfg)));
}

Json provenance_json(const pvstab::RunConfig& cfg) {
  Json p = Json::object();
  p.set("config_fnv1a", Json::str(run_hash(cfg)));
  p.set("tool_version", Json::str(pvstab::report::kToolVersion));
  return p;
}

std::vector<std::string> provenance_comments(const pvstab::RunConfig& cfg) {
  return {"config_fnv1a=" + run_hash(cfg),
          std::string("tool_version=") + pvstab::report::kToolVersion};
}

Json intervals_json(const std::vector<std::pair<int, int>>& intervals) {
  Json arr = Json::array();
  for (const auto& [lo, hi] : intervals) {
    Json pair = Json::array();
    pair.push_back(Json::integer(lo));
    pair.push_back(Json::integer(hi));
    arr.push_back(pair);
  }
  return arr;
}

Json range_json(const pvstab::StabilityRange& r) {
  Json out = Json::object();
  out.set("swept_label", Json::str(r.swept_label));
  out.set("n_max", Json::integer(r.n_max));
  out.set("margin_tol_rad_s", Json::number(r.margin_tol));
  Json fixed = Json::object();
  for (const auto& [label, count] : r.fixed_counts)
    fixed.set(label, Json::integer(count));
  out.set("fixed_counts", fixed);
  out.set("stable_intervals", intervals_json(r.stable_intervals));
  Json bounds = Json::array();
  for (const auto& b : r.boundaries) {
    Json bj = Json::object();
    bj.set("stable_side", Json::integer(b.stable_side));
    bj.set("unstable_side", Json::integer(b.unstable_side));
    bj.set("max_real_stable", Json::number(b.max_real_stable));
    bj.set("max_real_unstable", Json::number(b.max_real_unstable));
    bounds.push_back(bj);
  }
  out.set("boundaries", bounds);
  out.set("first_unstable", Json::integer(r.first_unstable));
  out.set("last_unstable", Json::integer(r.last_unstable));
  return out;
}

void cmd_margin(const CliState& s) {
  const pvstab::RunConfig cfg = load_config(s);
  pvstab::DelayMarginOptions opt;
  opt.include_transformer = cfg.analysis.margin_includes_transformer;
  opt.LT = cfg.LT_H;
  const pvstab::DelayMarginResult r =
      pvstab::delay_margin(cfg.inverter, 0.0,
                           cfg.analysis.margin_Td_max_us * 1e-6,
                           cfg.analysis.margin_step_us * 1e-6, opt);

  Json out = Json::object();
  out.set("crossed", Json::boolean(r.crossed));
  out.set("margin_us", Json::number(r.margin_s * 1e6));
  out.set("resolution_us", Json::number(r.resolution_s * 1e6));
  out.set("swept_max_us", Json::number(r.swept_max_s * 1e6));
  out.set("includes_transformer",
          Json::boolean(cfg.analysis.margin_includes_transformer));
  out.set("provenance", provenance_json(cfg));

  pvstab::report::OutputSession session(cfg.output.directory);
  if (wants(cfg, "json")) session.write("margin.json", out.dump());
  session.commit();

  if (r.crossed)
    std::cout << "margin: " << pvstab::report::format_double(r.margin_s * 1e6)
              << " us\n";
  else
    std::cout << "margin: stable throughout the swept range ("
              << pvstab::report::format_double(r.swept_max_s * 1e6)
              << " us)\n";
}

void cmd_ranges(const CliState& s) {
  const pvstab::RunConfig cfg = load_config(s);
  const pvstab::SystemModel m =
      pvstab::compose(pvstab::plant_groups(cfg), pvstab::resolved_grid(cfg));
  const pvstab::StabilityRange r =
      pvstab::find_ranges(m, cfg.analysis.swept_label, cfg.analysis.n_max,
                          cfg.analysis.margin_tol_rad_s);

  Json out = range_json(r);
  out.set("provenance", provenance_json(cfg));

  pvstab::report::OutputSession session(cfg.output.directory);
  if (wants(cfg, "json")) session.write("ranges.json", out.dump());
  session.commit();

  std::cout << "ranges: " << r.stable_intervals.size()
            << " stable interval(s), first_unstable=" << r.first_unstable
            << ", last_unstable=" << r.last_unstable << "\n";
}

void cmd_locus(const CliState& s) {
  const pvstab::RunConfig cfg = load_config(s);
  const pvstab::SystemModel m =
      pvstab::compose(pvstab::plant_groups(cfg), pvstab::resolved_grid(cfg));
  const pvstab::PoleLocus locus = pvstab::locus_trace(
      m, cfg.analysis.swept_label, cfg.analysis.locus_count_min,
      cfg.analysis.locus_count_max, cfg.analysis.locus_top_k);

  std::vector<std::string> comments = provenance_comments(cfg);
  for (const auto& w : locus.warnings) comments.push_back("warning: " + w);
  std::vector<std::vector<std::string>> rows;
  rows.reserve(locus.rows.size());
  for (const auto& row : locus.rows) {
    rows.push_back({std::to_string(row.count), std::to_string(row.branch_id),
                    pvstab::report::format_double(row.pole.real()),
                    pvstab::report::format_double(row.pole.imag())});
  }
  const std::string csv = pvstab::report::csv_document(
      comments, "count,branch_id,re_rad_s,im_rad_s", rows);

  pvstab::report::OutputSession session(cfg.output.directory);
  if (wants(cfg, "csv")) session.write("locus.csv", csv);
  session.commit();

  std::cout << "locus: " << locus.rows.size() << " rows, "
            << locus.warnings.size() << " warning(s)\n";
}

void cmd_simulate(const CliState& s) {
  const pvstab::RunConfig cfg = load_config(s);
  const pvstab::SystemModel m =
      pvstab::compose(pvstab::plant_groups(cfg), pvstab::resolved_grid(cfg));
  const pvstab::StateSpace ss = pvstab::build_statespace(m);
  const pvstab::Waveform w = pvstab::simulate(ss, cfg.sim);
  const pvstab::SimVerdict v = pvstab::detect_stability(w, cfg.sim);

  pvstab::report::OutputSession session(cfg.output.directory);
  if (wants(cfg, "csv")) {
    std::string header = "t_s";
    for (const auto& label : w.group_labels) header += ",is_" + label + "_A";
    header += ",v_pcc_V";
    std::vector<std::vector<std::string>> rows;
    rows.reserve(w.t.size());
    for (std::size_t i = 0; i < w.t.size(); ++i) {
      std::vector<std::string> row;
      row.reserve(w.group_labels.size() + 2);
      row.push_back(pvstab::report::format_double(w.t[i]));
      for (const auto& col : w.i_s)
        row.push_back(pvstab::report::format_double(col[i]));
      row.push_back(pvstab::report::format_double(w.v_pcc[i]));
      rows.push_back(std::move(row));
    }
    session.write("waveform.csv",
                  pvstab::report::csv_document(provenance_comments(cfg),
                                               header, rows));
  }
  if (wants(cfg, "json")) {
    Json out = Json::object();
    out.set("outcome", Json::str(pvstab::to_string(v.outcome)));
    out.set("mode", Json::str(cfg.sim.mode == pvstab::SimMode::Sampled
                                  ? "sampled"
                                  : "pade_linear"));
    Json labels = Json::array();
    for (const auto& label : v.group_labels) labels.push_back(Json::str(label));
    out.set("group_labels", labels);
    Json base = Json::array();
    for (double b : v.baseline_rms) base.push_back(Json::number(b));
    out.set("baseline_rms_A", base);
    Json fin = Json::array();
    for (double f : v.final_rms) fin.push_back(Json::number(f));
    out.set("final_rms_A", fin);
    out.set("diverged", Json::boolean(v.diverged));
    out.set("diverged_at_s",
            v.diverged ? Json::number(v.diverged_at) : Json::null());
    out.set("provenance", provenance_json(cfg));
    session.write("verdict.json", out.dump());
  }
  session.commit();

  std::cout << "simulate: " << pvstab::to_string(v.outcome) << "\n";
}

void cmd_derive_grid(const CliState& s) {
  const pvstab::RunConfig cfg = load_config(s);
  const pvstab::GridImpedance g = pvstab::resolved_grid(cfg);

  Json out = Json::object();
  out.set("Rg_ohm", Json::number(g.Rg));
  out.set("Lg_H", Json::number(g.Lg));
  Json trace = Json::array();
  for (const auto& line : g.trace) trace.push_back(Json::str(line));
  out.set("referral_trace", trace);
  out.set("provenance", provenance_json(cfg));

  pvstab::report::OutputSession session(cfg.output.directory);
  if (wants(cfg, "json")) session.write("grid.json", out.dump());
  session.commit();

  std::cout << "grid: Rg=" << pvstab::report::format_double(g.Rg)
            << " ohm, Lg=" << pvstab::report::format_double(g.Lg) << " H\n";
}

// The heterogeneous-mix scenario table: five structures, each in two count
// flavours, swept at two further delay values.
struct CaseDef {
  const char* name;
  std::vector<std::pair<double, int>> originals;  // (Td_us, count)
  std::vector<double> swept_Td_us;
};

std::vector<CaseDef> case_table() {
  const double N1 = 67.5, N2 = 72.0, N3 = 75.0, N4 = 79.5, N5 = 82.5;
  return {
      {"I", {{N1, 8}}, {N3, N5}},
      {"I", {{N1, 32}}, {N3, N5}},
      {"II", {{N5, 2}}, {N1, N3}},
      {"II", {{N5, 8}}, {N1, N3}},
      {"III", {{N1, 2}, {N3, 6}}, {N4, N5}},
      {"III", {{N1, 6}, {N3, 2}}, {N4, N5}},
      {"IV", {{N1, 2}, {N5, 6}}, {N3, N4}},
      {"IV", {{N1, 6}, {N5, 2}}, {N3, N4}},
      {"V", {{N3, 2}, {N5, 6}}, {N1, N2}},
      {"V", {{N3, 6}, {N5, 2}}, {N1, N2}},
  };
}

void cmd_tables(const CliState& s) {
  const pvstab::RunConfig cfg = load_config(s);
  const pvstab::GridImpedance grid = pvstab::resolved_grid(cfg);
  const pvstab::SystemModel m =
      pvstab::compose(pvstab::plant_groups(cfg), grid);

  Json out = Json::object();

  // Identical-plant sweep over the configured delay values.
  std::vector<double> delays_s;
  for (double us : cfg.analysis.delay_values_us) delays_s.push_back(us * 1e-6);
  const std::vector<pvstab::StabilityRange> sweep =
      pvstab::delay_sweep(m, cfg.analysis.swept_label, delays_s,
                          cfg.analysis.n_max, cfg.analysis.margin_tol_rad_s);
  Json sweep_json = Json::array();
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    Json row = Json::object();
    row.set("Td_us", Json::number(cfg.analysis.delay_values_us[i]));
    row.set("first_unstable", Json::integer(sweep[i].first_unstable));
    row.set("last_unstable", Json::integer(sweep[i].last_unstable));
    row.set("stable_intervals", intervals_json(sweep[i].stable_intervals));
    sweep_json.push_back(row);
  }
  out.set("delay_sweep", sweep_json);

  // Heterogeneous cases: fixed original groups, swept group count 1..n_max.
  Json cases_json = Json::array();
  int case_rows = 0;
  for (const CaseDef& def : case_table()) {
    for (double swept_us : def.swept_Td_us) {
      std::vector<pvstab::PlantGroup> groups;
      for (std::size_t i = 0; i < def.originals.size(); ++i) {
        pvstab::PlantGroup g;
        g.label = "orig_" + std::to_string(i + 1);
        g.params = cfg.inverter;
        g.params.Td = def.originals[i].first * 1e-6;
        g.LT = cfg.LT_H;
        g.count = def.originals[i].second;
        groups.push_back(std::move(g));
      }
      pvstab::PlantGroup swept;
      swept.label = "swept";
      swept.params = cfg.inverter;
      swept.params.Td = swept_us * 1e-6;
      swept.LT = cfg.LT_H;
      swept.count = 1;
      groups.push_back(std::move(swept));

      const pvstab::SystemModel mc = pvstab::compose(groups, grid);
      const pvstab::StabilityRange r = pvstab::find_ranges(
          mc, "swept", cfg.analysis.n_max, cfg.analysis.margin_tol_rad_s);

      Json row = Json::object();
      row.set("case", Json::str(def.name));
      Json originals = Json::array();
      for (const auto& [td, count] : def.originals) {
        Json o = Json::object();
        o.set("Td_us", Json::number(td));
        o.set("count", Json::integer(count));
        originals.push_back(o);
      }
      row.set("originals", originals);
      row.set("swept_Td_us", Json::number(swept_us));
      row.set("first_unstable", Json::integer(r.first_unstable));
      row.set("last_unstable", Json::integer(r.last_unstable));
      row.set("stable_intervals", intervals_json(r.stable_intervals));
      cases_json.push_back(row);
      ++case_rows;
    }
  }
  out.set("cases", cases_json);
  out.set("n_max", Json::integer(cfg.analysis.n_max));
  out.set("margin_tol_rad_s", Json::number(cfg.analysis.margin_tol_rad_s));
  out.set("provenance", provenance_json(cfg));

  pvstab::report::OutputSession session(cfg.output.directory);
  if (wants(cfg, "json")) session.write("tables.json", out.dump());
  session.commit();

  std::cout << "tables: " << sweep.size() << " delay rows, " << case_rows
            << " case rows\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Stability analysis and time-domain simulation of multi-inverter PV "
      "plants on a weak grid"};
  app.require_subcommand(1);

  CliState state;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", state.config_path,
                    "configuration JSON file (defaults apply when omitted)");
    sub->add_option("--set", state.sets,
                    "override one configuration value: dotted.path=value");
  };

  CLI::App* margin =
      app.add_subcommand("margin", "delay margin of a single inverter");
  add_common(margin);
  CLI::App* ranges = app.add_subcommand(
      "ranges", "stable count ranges for the swept group");
  add_common(ranges);
  CLI::App* locus = app.add_subcommand(
      "locus", "dominant pole trajectories while the count grows");
  add_common(locus);
  CLI::App* simulate =
      app.add_subcommand("simulate", "time-domain run plus verdict");
  add_common(simulate);
  CLI::App* derive =
      app.add_subcommand("derive-grid", "grid impedance referral");
  add_common(derive);
  CLI::App* tables = app.add_subcommand(
      "reproduce-tables", "delay sweep plus heterogeneous case table");
  add_common(tables);

  try {
    app.parse(argc, argv);
    if (margin->parsed()) cmd_margin(state);
    if (ranges->parsed()) cmd_ranges(state);
    if (locus->parsed()) cmd_locus(state);
    if (simulate->parsed()) cmd_simulate(state);
    if (derive->parsed()) cmd_derive_grid(state);
    if (tables->parsed()) cmd_tables(state);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const pvstab::ValidationError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const pvstab::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const pvstab::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const pvstab::EngineError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const pvstab::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
