#include "pvstab/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pvstab/errors.hpp"

namespace pvstab {

namespace {

using nlohmann::json;

constexpr double kPi = 3.141592653589793;

struct Problems {
  std::vector<std::string> list;
  void add(const std::string& path, const std::string& msg) {
    list.push_back(path + ": " + msg);
  }
  void finish() {
    if (!list.empty()) throw ValidationError(list);
  }
};

/// Strict view of one JSON object: typed getters record the keys they
/// consume, and close() reports everything left over as unknown.
class ObjectView {
 public:
  ObjectView(const json* node, std::string path, Problems& problems)
      : node_(node), path_(std::move(path)), problems_(problems) {
    if (node_ && !node_->is_object()) {
      problems_.add(path_, "must be an object");
      node_ = nullptr;
    }
  }

  bool present() const { return node_ != nullptr; }
  const std::string& path() const { return path_; }

  const json* raw(const char* key) {
    seen_.insert(key);
    if (!node_) return nullptr;
    const auto it = node_->find(key);
    return it == node_->end() ? nullptr : &*it;
  }

  std::optional<double> number(const char* key) {
    const json* v = raw(key);
    if (!v) return std::nullopt;
    if (!v->is_number()) {
      problems_.add(path_ + "." + key, "must be a number");
      return std::nullopt;
    }
    return v->get<double>();
  }

  std::optional<long long> integer(const char* key) {
    const json* v = raw(key);
    if (!v) return std::nullopt;
    if (!v->is_number_integer()) {
      problems_.add(path_ + "." + key, "must be an integer");
      return std::nullopt;
    }
    return v->get<long long>();
  }

  std::optional<bool> boolean(const char* key) {
    const json* v = raw(key);
    if (!v) return std::nullopt;
    if (!v->is_boolean()) {
      problems_.add(path_ + "." + key, "must be a boolean");
      return std::nullopt;
    }
    return v->get<bool>();
  }

  std::optional<std::string> text(const char* key) {
    const json* v = raw(key);
    if (!v) return std::nullopt;
    if (!v->is_string()) {
      problems_.add(path_ + "." + key, "must be a string");
      return std::nullopt;
    }
    return v->get<std::string>();
  }

  void close() {
    if (!node_) return;
    for (auto it = node_->begin(); it != node_->end(); ++it)
      if (!seen_.count(it.key()))
        problems_.add(path_ + "." + it.key(), "unknown key");
  }

 private:
  const json* node_;
  std::string path_;
  Problems& problems_;
  std::set<std::string> seen_;
};

void set_int(ObjectView& o, const char* key, int& target) {
  if (const auto v = o.integer(key)) {
    if (*v < -1000000000LL || *v > 1000000000LL)
      return;  // out-of-range integers fail the range checks below anyway
    target = static_cast<int>(*v);
  }
}

void parse_inverter(ObjectView& o, InverterParams& p) {
  if (const auto v = o.number("kp")) p.kp = *v;
  if (const auto v = o.number("kr")) p.kr = *v;
  if (const auto v = o.number("kd")) p.kd = *v;
  if (const auto v = o.number("omega0_rad_s")) p.omega0 = *v;
  if (const auto v = o.number("omega_i_rad_s")) p.omega_i = *v;
  if (const auto v = o.number("Vdc_V")) p.Vdc = *v;
  if (const auto v = o.number("L1_uH")) p.L1 = *v * 1e-6;
  if (const auto v = o.number("L2_uH")) p.L2 = *v * 1e-6;
  if (const auto v = o.number("Cf_uF")) p.Cf = *v * 1e-6;
  if (const auto v = o.number("Ts_us")) p.Ts = *v * 1e-6;
  if (const auto v = o.number("lambda")) p.lambda = *v;
  if (const auto v = o.number("fsw_hz")) p.fsw = *v;
  o.close();
}

void parse_grid(ObjectView& o, GridParams& g, Problems& pr) {
  bool mode_set = false;
  if (const auto v = o.text("mode")) {
    mode_set = true;
    if (*v == "direct") {
      g.mode = GridMode::Direct;
    } else if (*v == "ratings") {
      g.mode = GridMode::Ratings;
    } else {
      pr.add(o.path() + ".mode", "must be \"direct\" or \"ratings\"");
      mode_set = false;
    }
  }
  const json* direct = o.raw("direct");
  const json* ratings = o.raw("ratings");
  if (direct) {
    ObjectView d(direct, o.path() + ".direct", pr);
    if (const auto v = d.number("Rg_ohm")) g.direct.Rg_ohm = *v;
    if (const auto v = d.number("Lg_uH")) g.direct.Lg_H = *v * 1e-6;
    d.close();
  }
  if (ratings) {
    ObjectView r(ratings, o.path() + ".ratings", pr);
    if (const auto v = r.number("S_stepup_VA")) g.ratings.S_stepup_VA = *v;
    if (const auto v = r.number("Us_pct")) g.ratings.Us_pct = *v;
    if (const auto v = r.number("U_H_V")) g.ratings.U_H_V = *v;
    if (const auto v = r.number("U_L_V")) g.ratings.U_L_V = *v;
    if (const auto v = r.number("r_line_ohm_per_km"))
      g.ratings.r_line_ohm_per_km = *v;
    if (const auto v = r.number("x_line_ohm_per_km"))
      g.ratings.x_line_ohm_per_km = *v;
    if (const auto v = r.number("length_km")) g.ratings.length_km = *v;
    if (const auto v = r.number("base_voltage_V"))
      g.ratings.base_voltage_V = *v;
    if (const auto v = r.number("Lg_scale")) g.ratings.Lg_scale = *v;
    r.close();
  }
  // Only the selected mode's parameter block may appear.
  if (mode_set || direct || ratings) {
    if (g.mode == GridMode::Direct) {
      if (ratings)
        pr.add(o.path() + ".ratings", "not allowed when mode is \"direct\"");
      if (!direct)
        pr.add(o.path() + ".direct", "required when mode is \"direct\"");
    } else {
      if (direct)
        pr.add(o.path() + ".direct", "not allowed when mode is \"ratings\"");
    }
  }
  o.close();
}

void parse_groups(const json* node, std::vector<GroupSpec>& groups,
                  Problems& pr) {
  if (!node->is_array()) {
    pr.add("$.groups", "must be an array");
    return;
  }
  groups.clear();
  for (std::size_t i = 0; i < node->size(); ++i) {
    std::ostringstream pre;
    pre << "$.groups[" << i << "]";
    ObjectView o(&(*node)[i], pre.str(), pr);
    GroupSpec gs;
    if (const auto v = o.text("label")) gs.label = *v;
    else if (o.present()) pr.add(pre.str() + ".label", "required string");
    if (const auto v = o.number("Td_us")) gs.Td_us = *v;
    set_int(o, "count", gs.count);
    o.close();
    groups.push_back(std::move(gs));
  }
}

void parse_analysis(ObjectView& o, AnalysisConfig& a, Problems& pr) {
  set_int(o, "n_max", a.n_max);
  if (const auto v = o.number("margin_tol_rad_s")) a.margin_tol_rad_s = *v;
  if (const auto v = o.text("swept_label")) a.swept_label = *v;
  if (const auto v = o.number("margin_Td_max_us")) a.margin_Td_max_us = *v;
  if (const auto v = o.number("margin_step_us")) a.margin_step_us = *v;
  if (const auto v = o.boolean("margin_includes_transformer"))
    a.margin_includes_transformer = *v;
  set_int(o, "locus_count_min", a.locus_count_min);
  set_int(o, "locus_count_max", a.locus_count_max);
  set_int(o, "locus_top_k", a.locus_top_k);
  if (const json* dv = o.raw("delay_values_us")) {
    if (!dv->is_array()) {
      pr.add(o.path() + ".delay_values_us", "must be an array of numbers");
    } else {
      a.delay_values_us.clear();
      for (std::size_t i = 0; i < dv->size(); ++i) {
        if (!(*dv)[i].is_number()) {
          std::ostringstream p;
          p << o.path() << ".delay_values_us[" << i << "]";
          pr.add(p.str(), "must be a number");
        } else {
          a.delay_values_us.push_back((*dv)[i].get<double>());
        }
      }
    }
  }
  o.close();
}

void parse_sim(ObjectView& o, SimConfig& s, Problems& pr) {
  if (const auto v = o.text("mode")) {
    if (*v == "pade_linear") s.mode = SimMode::PadeLinear;
    else if (*v == "sampled") s.mode = SimMode::Sampled;
    else pr.add(o.path() + ".mode", "must be \"pade_linear\" or \"sampled\"");
  }
  if (const auto v = o.number("duration_s")) s.duration_s = *v;
  set_int(o, "substeps_per_Ts", s.substeps_per_Ts);
  if (const auto v = o.number("reference_amplitude_A"))
    s.reference_amplitude_A = *v;
  if (const auto v = o.number("grid_rms_V")) s.grid_rms_V = *v;
  if (const auto v = o.number("divergence_window_s"))
    s.divergence_window_s = *v;
  if (const auto v = o.number("divergence_factor")) s.divergence_factor = *v;
  o.close();
}

void parse_output(ObjectView& o, OutputConfig& out, Problems& pr) {
  if (const auto v = o.text("directory")) out.directory = *v;
  if (const json* f = o.raw("formats")) {
    if (!f->is_array()) {
      pr.add(o.path() + ".formats", "must be an array of strings");
    } else {
      out.formats.clear();
      for (std::size_t i = 0; i < f->size(); ++i) {
        std::ostringstream p;
        p << o.path() << ".formats[" << i << "]";
        if (!(*f)[i].is_string())
          pr.add(p.str(), "must be a string");
        else
          out.formats.push_back((*f)[i].get<std::string>());
      }
    }
  }
  o.close();
}

void cross_validate(const RunConfig& c, Problems& pr) {
  const auto pos = [&](double v, const std::string& path) {
    if (!(v > 0.0) || !std::isfinite(v))
      pr.add(path, "must be strictly positive");
  };
  const auto nonneg = [&](double v, const std::string& path) {
    if (v < 0.0 || !std::isfinite(v)) pr.add(path, "must be >= 0");
  };

  pos(c.inverter.kp, "$.inverter.kp");
  pos(c.inverter.kr, "$.inverter.kr");
  pos(c.inverter.kd, "$.inverter.kd");
  pos(c.inverter.omega0, "$.inverter.omega0_rad_s");
  pos(c.inverter.omega_i, "$.inverter.omega_i_rad_s");
  pos(c.inverter.Vdc, "$.inverter.Vdc_V");
  pos(c.inverter.L1, "$.inverter.L1_uH");
  pos(c.inverter.L2, "$.inverter.L2_uH");
  pos(c.inverter.Cf, "$.inverter.Cf_uF");
  pos(c.inverter.Ts, "$.inverter.Ts_us");
  if (!(c.inverter.lambda > 0.0) || c.inverter.lambda > 1.0)
    pr.add("$.inverter.lambda", "must lie in (0, 1]");
  nonneg(c.inverter.fsw, "$.inverter.fsw_hz");

  pos(c.LT_H, "$.transformer.LT_uH");

  if (c.grid.mode == GridMode::Direct) {
    nonneg(c.grid.direct.Rg_ohm, "$.grid.direct.Rg_ohm");
    pos(c.grid.direct.Lg_H, "$.grid.direct.Lg_uH");
  } else {
    pos(c.grid.ratings.S_stepup_VA, "$.grid.ratings.S_stepup_VA");
    pos(c.grid.ratings.Us_pct, "$.grid.ratings.Us_pct");
    pos(c.grid.ratings.U_H_V, "$.grid.ratings.U_H_V");
    pos(c.grid.ratings.U_L_V, "$.grid.ratings.U_L_V");
    nonneg(c.grid.ratings.r_line_ohm_per_km,
           "$.grid.ratings.r_line_ohm_per_km");
    nonneg(c.grid.ratings.x_line_ohm_per_km,
           "$.grid.ratings.x_line_ohm_per_km");
    nonneg(c.grid.ratings.length_km, "$.grid.ratings.length_km");
    pos(c.grid.ratings.base_voltage_V, "$.grid.ratings.base_voltage_V");
    pos(c.grid.ratings.Lg_scale, "$.grid.ratings.Lg_scale");
  }

  if (c.groups.empty()) pr.add("$.groups", "must not be empty");
  std::set<std::string> labels;
  for (std::size_t i = 0; i < c.groups.size(); ++i) {
    std::ostringstream pre;
    pre << "$.groups[" << i << "]";
    const GroupSpec& g = c.groups[i];
    if (g.label.empty()) pr.add(pre.str() + ".label", "must not be empty");
    if (!labels.insert(g.label).second)
      pr.add(pre.str() + ".label", "duplicate label '" + g.label + "'");
    if (g.count < 1) pr.add(pre.str() + ".count", "must be >= 1");
    if (g.Td_us && (!(*g.Td_us >= 0.0) || !std::isfinite(*g.Td_us)))
      pr.add(pre.str() + ".Td_us", "must be >= 0");
  }

  const AnalysisConfig& a = c.analysis;
  if (a.n_max < 1 || a.n_max > 10000)
    pr.add("$.analysis.n_max", "must lie in [1, 10000]");
  nonneg(a.margin_tol_rad_s, "$.analysis.margin_tol_rad_s");
  if (!labels.count(a.swept_label))
    pr.add("$.analysis.swept_label",
           "'" + a.swept_label + "' does not name a group");
  pos(a.margin_Td_max_us, "$.analysis.margin_Td_max_us");
  pos(a.margin_step_us, "$.analysis.margin_step_us");
  if (a.margin_Td_max_us * 1e-6 > 5.0 * c.inverter.Ts &&
      std::isfinite(a.margin_Td_max_us))
    pr.add("$.analysis.margin_Td_max_us",
           "must not exceed five sampling periods");
  if (a.locus_count_min < 1 || a.locus_count_max < a.locus_count_min ||
      a.locus_count_max > 10000)
    pr.add("$.analysis.locus_count_min",
           "need 1 <= locus_count_min <= locus_count_max <= 10000");
  if (a.locus_top_k < 1) pr.add("$.analysis.locus_top_k", "must be >= 1");
  for (std::size_t i = 0; i < a.delay_values_us.size(); ++i) {
    if (a.delay_values_us[i] < 0.0 || !std::isfinite(a.delay_values_us[i])) {
      std::ostringstream p;
      p << "$.analysis.delay_values_us[" << i << "]";
      pr.add(p.str(), "must be >= 0");
    }
  }

  const SimConfig& s = c.sim;
  pos(s.duration_s, "$.sim.duration_s");
  if (s.substeps_per_Ts < 4) pr.add("$.sim.substeps_per_Ts", "must be >= 4");
  nonneg(s.reference_amplitude_A, "$.sim.reference_amplitude_A");
  nonneg(s.grid_rms_V, "$.sim.grid_rms_V");
  pos(s.divergence_window_s, "$.sim.divergence_window_s");
  if (!(s.divergence_factor > 1.0))
    pr.add("$.sim.divergence_factor", "must exceed 1");
  if (std::isfinite(s.duration_s) && std::isfinite(s.divergence_window_s) &&
      s.duration_s < 2.0 * s.divergence_window_s)
    pr.add("$.sim.duration_s",
           "must cover at least two divergence windows");

  if (c.output.directory.empty())
    pr.add("$.output.directory", "must not be empty");
  if (c.output.formats.empty())
    pr.add("$.output.formats", "must not be empty");
  for (std::size_t i = 0; i < c.output.formats.size(); ++i) {
    const std::string& f = c.output.formats[i];
    if (f != "json" && f != "csv") {
      std::ostringstream p;
      p << "$.output.formats[" << i << "]";
      pr.add(p.str(), "must be \"json\" or \"csv\"");
    }
  }
}

}  // namespace

RunConfig default_profile() {
  RunConfig c;
  // Unit conversions below repeat the parser's arithmetic exactly so that
  // configs/default.json parses to a field-for-field equal RunConfig.
  c.inverter.kp = 0.001;
  c.inverter.kr = 1.0;
  c.inverter.kd = 0.0017;
  c.inverter.omega0 = 100.0 * kPi;
  c.inverter.omega_i = kPi;
  c.inverter.Vdc = 553.0;
  c.inverter.L1 = 90.0 * 1e-6;
  c.inverter.L2 = 18.0 * 1e-6;
  c.inverter.Cf = 182.0 * 1e-6;
  c.inverter.Ts = 50.0 * 1e-6;
  c.inverter.lambda = 1.0;
  c.inverter.fsw = 10000.0;

  c.LT_H = 20.884311632518504 * 1e-6;

  c.grid.mode = GridMode::Ratings;
  c.grid.ratings.S_stepup_VA = 6.3e6;
  c.grid.ratings.Us_pct = 10.5;
  c.grid.ratings.U_H_V = 110000.0;
  c.grid.ratings.U_L_V = 10000.0;
  c.grid.ratings.r_line_ohm_per_km = 0.21;
  c.grid.ratings.x_line_ohm_per_km = 0.34;
  c.grid.ratings.length_km = 20.0;
  c.grid.ratings.base_voltage_V = 270.0;
  c.grid.ratings.Lg_scale = 9.6;

  c.groups = {GroupSpec{"plant", 75.0, 2}};

  c.analysis.n_max = 1000;
  c.analysis.margin_tol_rad_s = 0.3141592653589793;
  c.analysis.swept_label = "plant";
  c.analysis.margin_Td_max_us = 250.0;
  c.analysis.margin_step_us = 2.5;
  c.analysis.margin_includes_transformer = false;
  c.analysis.locus_count_min = 2;
  c.analysis.locus_count_max = 100;
  c.analysis.locus_top_k = 4;
  c.analysis.delay_values_us = {0.0, 67.5, 75.0, 82.5};

  c.sim.mode = SimMode::PadeLinear;
  c.sim.duration_s = 0.5;
  c.sim.substeps_per_Ts = 10;
  c.sim.reference_amplitude_A = 1.0;
  c.sim.grid_rms_V = 156.0;
  c.sim.divergence_window_s = 0.2;
  c.sim.divergence_factor = 10.0;

  c.output.directory = "out";
  c.output.formats = {"json", "csv"};
  return c;
}

RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError({std::string("JSON parse error: ") + e.what()});
  }

  Problems pr;
  RunConfig cfg = default_profile();
  ObjectView root(&j, "$", pr);

  if (const json* inv = root.raw("inverter")) {
    ObjectView o(inv, "$.inverter", pr);
    parse_inverter(o, cfg.inverter);
  }
  if (const json* tr = root.raw("transformer")) {
    ObjectView o(tr, "$.transformer", pr);
    if (const auto v = o.number("LT_uH")) cfg.LT_H = *v * 1e-6;
    o.close();
  }
  if (const json* gr = root.raw("grid")) {
    ObjectView o(gr, "$.grid", pr);
    parse_grid(o, cfg.grid, pr);
  }
  if (const json* gs = root.raw("groups")) parse_groups(gs, cfg.groups, pr);
  if (const json* an = root.raw("analysis")) {
    ObjectView o(an, "$.analysis", pr);
    parse_analysis(o, cfg.analysis, pr);
  }
  if (const json* sm = root.raw("sim")) {
    ObjectView o(sm, "$.sim", pr);
    parse_sim(o, cfg.sim, pr);
  }
  if (const json* out = root.raw("output")) {
    ObjectView o(out, "$.output", pr);
    parse_output(o, cfg.output, pr);
  }
  root.close();

  cross_validate(cfg, pr);
  pr.finish();
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read config file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  if (f.bad()) throw IoError("cannot read config file: " + path);
  return parse_config_text(ss.str());
}

std::string apply_override(const std::string& text,
                           const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ValidationError({"--set expects key=value, got: " + assignment});
  const std::string path = assignment.substr(0, eq);
  const std::string value_text = assignment.substr(eq + 1);

  json j;
  try {
    j = text.empty() ? json::object() : json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError({std::string("JSON parse error: ") + e.what()});
  }

  json value;
  try {
    value = json::parse(value_text);
  } catch (const json::parse_error&) {
    value = value_text;  // bare words are string values
  }

  struct Seg {
    std::string key;
    std::vector<std::size_t> idx;
  };
  std::vector<Seg> segs;
  std::size_t pos = 0;
  while (pos <= path.size()) {
    std::size_t dot = path.find('.', pos);
    if (dot == std::string::npos) dot = path.size();
    std::string part = path.substr(pos, dot - pos);
    Seg seg;
    std::size_t br = part.find('[');
    seg.key = part.substr(0, br == std::string::npos ? part.size() : br);
    if (seg.key.empty())
      throw ValidationError({"--set path has an empty segment: " + path});
    while (br != std::string::npos) {
      const std::size_t close = part.find(']', br);
      if (close == std::string::npos)
        throw ValidationError({"--set path has an unclosed index: " + path});
      const std::string digits = part.substr(br + 1, close - br - 1);
      if (digits.empty() ||
          digits.find_first_not_of("0123456789") != std::string::npos)
        throw ValidationError({"--set path has a bad index: " + path});
      seg.idx.push_back(static_cast<std::size_t>(std::stoull(digits)));
      br = part.find('[', close);
    }
    segs.push_back(std::move(seg));
    if (dot == path.size()) break;
    pos = dot + 1;
  }

  json* cur = &j;
  for (std::size_t s = 0; s < segs.size(); ++s) {
    const Seg& seg = segs[s];
    if (cur->is_null()) *cur = json::object();
    if (!cur->is_object())
      throw ValidationError({"--set path crosses a non-object: " + path});
    cur = &(*cur)[seg.key];
    for (const std::size_t i : seg.idx) {
      if (!cur->is_array())
        throw ValidationError({"--set path indexes a non-array: " + path});
      if (i >= cur->size())
        throw ValidationError({"--set index out of range: " + path});
      cur = &(*cur)[i];
    }
  }
  *cur = value;
  return j.dump();
}

std::string canonical_config(const RunConfig& c) {
  using report::Json;
  Json inv = Json::object();
  inv.set("kp", Json::number(c.inverter.kp));
  inv.set("kr", Json::number(c.inverter.kr));
  inv.set("kd", Json::number(c.inverter.kd));
  inv.set("omega0_rad_s", Json::number(c.inverter.omega0));
  inv.set("omega_i_rad_s", Json::number(c.inverter.omega_i));
  inv.set("Vdc_V", Json::number(c.inverter.Vdc));
  inv.set("L1_H", Json::number(c.inverter.L1));
  inv.set("L2_H", Json::number(c.inverter.L2));
  inv.set("Cf_F", Json::number(c.inverter.Cf));
  inv.set("Ts_s", Json::number(c.inverter.Ts));
  inv.set("lambda", Json::number(c.inverter.lambda));
  inv.set("fsw_hz", Json::number(c.inverter.fsw));

  Json grid = Json::object();
  if (c.grid.mode == GridMode::Direct) {
    grid.set("mode", Json::str("direct"));
    Json d = Json::object();
    d.set("Rg_ohm", Json::number(c.grid.direct.Rg_ohm));
    d.set("Lg_H", Json::number(c.grid.direct.Lg_H));
    grid.set("direct", d);
  } else {
    grid.set("mode", Json::str("ratings"));
    Json r = Json::object();
    r.set("S_stepup_VA", Json::number(c.grid.ratings.S_stepup_VA));
    r.set("Us_pct", Json::number(c.grid.ratings.Us_pct));
    r.set("U_H_V", Json::number(c.grid.ratings.U_H_V));
    r.set("U_L_V", Json::number(c.grid.ratings.U_L_V));
    r.set("r_line_ohm_per_km", Json::number(c.grid.ratings.r_line_ohm_per_km));
    r.set("x_line_ohm_per_km", Json::number(c.grid.ratings.x_line_ohm_per_km));
    r.set("length_km", Json::number(c.grid.ratings.length_km));
    r.set("base_voltage_V", Json::number(c.grid.ratings.base_voltage_V));
    r.set("Lg_scale", Json::number(c.grid.ratings.Lg_scale));
    grid.set("ratings", r);
  }

  Json groups = Json::array();
  for (const auto& g : c.groups) {
    Json e = Json::object();
    e.set("label", Json::str(g.label));
    e.set("Td_s", g.Td_us ? Json::number(*g.Td_us * 1e-6) : Json::null());
    e.set("count", Json::integer(g.count));
    groups.push_back(e);
  }

  Json an = Json::object();
  an.set("n_max", Json::integer(c.analysis.n_max));
  an.set("margin_tol_rad_s", Json::number(c.analysis.margin_tol_rad_s));
  an.set("swept_label", Json::str(c.analysis.swept_label));
  an.set("margin_Td_max_s", Json::number(c.analysis.margin_Td_max_us * 1e-6));
  an.set("margin_step_s", Json::number(c.analysis.margin_step_us * 1e-6));
  an.set("margin_includes_transformer",
         Json::boolean(c.analysis.margin_includes_transformer));
  an.set("locus_count_min", Json::integer(c.analysis.locus_count_min));
  an.set("locus_count_max", Json::integer(c.analysis.locus_count_max));
  an.set("locus_top_k", Json::integer(c.analysis.locus_top_k));
  Json dv = Json::array();
  for (double d : c.analysis.delay_values_us)
    dv.push_back(Json::number(d * 1e-6));
  an.set("delay_values_s", dv);

  Json sim = Json::object();
  sim.set("mode", Json::str(c.sim.mode == SimMode::Sampled ? "sampled"
                                                           : "pade_linear"));
  sim.set("duration_s", Json::number(c.sim.duration_s));
  sim.set("substeps_per_Ts", Json::integer(c.sim.substeps_per_Ts));
  sim.set("reference_amplitude_A", Json::number(c.sim.reference_amplitude_A));
  sim.set("grid_rms_V", Json::number(c.sim.grid_rms_V));
  sim.set("divergence_window_s", Json::number(c.sim.divergence_window_s));
  sim.set("divergence_factor", Json::number(c.sim.divergence_factor));

  Json out = Json::object();
  out.set("directory", Json::str(c.output.directory));
  Json fmts = Json::array();
  for (const auto& f : c.output.formats) fmts.push_back(Json::str(f));
  out.set("formats", fmts);

  Json root = Json::object();
  root.set("inverter", inv);
  root.set("transformer_LT_H", Json::number(c.LT_H));
  root.set("grid", grid);
  root.set("groups", groups);
  root.set("analysis", an);
  root.set("sim", sim);
  root.set("output", out);
  return root.dump();
}

std::vector<PlantGroup> plant_groups(const RunConfig& cfg) {
  std::vector<PlantGroup> out;
  out.reserve(cfg.groups.size());
  for (const auto& g : cfg.groups) {
    PlantGroup pg;
    pg.label = g.label;
    pg.params = cfg.inverter;
    if (g.Td_us) pg.params.Td = *g.Td_us * 1e-6;
    pg.LT = cfg.LT_H;
    pg.count = g.count;
    out.push_back(std::move(pg));
  }
  return out;
}

GridImpedance resolved_grid(const RunConfig& cfg) {
  return resolve_grid(cfg.grid, cfg.inverter.omega0);
}

}  // namespace pvstab
