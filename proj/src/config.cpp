#include "fsge/config.hpp"

#include "fsge/error.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <regex>
#include <sstream>

namespace fsge::cli {

using json = nlohmann::json;

namespace {

enum class Kind { Real, Pressure, Angle, Int, Bool, Choice, AutoBool, RealList };

struct FieldSpec {
  std::string path;
  Kind kind;
  std::string unit;
  std::function<double&(RunConfig&)> real;
  std::function<int&(RunConfig&)> integer;
  std::function<bool&(RunConfig&)> flag;
  std::function<std::optional<bool>&(RunConfig&)> auto_flag;
  std::function<std::vector<double>&(RunConfig&)> list;
  std::function<void(RunConfig&, const std::string&)> set_choice;
  std::function<std::string(const RunConfig&)> get_choice;
};

FieldSpec spec(std::string path, Kind kind, std::string unit) {
  FieldSpec s;
  s.path = std::move(path);
  s.kind = kind;
  s.unit = std::move(unit);
  return s;
}

FieldSpec real(std::string path, std::string unit, std::function<double&(RunConfig&)> f, Kind kind = Kind::Real) {
  FieldSpec s = spec(std::move(path), kind, std::move(unit));
  s.real = std::move(f);
  return s;
}

FieldSpec integer(std::string path, std::function<int&(RunConfig&)> f) {
  FieldSpec s = spec(std::move(path), Kind::Int, "");
  s.integer = std::move(f);
  return s;
}

FieldSpec flag(std::string path, std::function<bool&(RunConfig&)> f) {
  FieldSpec s = spec(std::move(path), Kind::Bool, "");
  s.flag = std::move(f);
  return s;
}

FieldSpec choice(std::string path, std::string options, std::function<void(RunConfig&, const std::string&)> set,
                 std::function<std::string(const RunConfig&)> get) {
  FieldSpec s = spec(std::move(path), Kind::Choice, std::move(options));
  s.set_choice = std::move(set);
  s.get_choice = std::move(get);
  return s;
}

#define MIX(name, unit) real("mixture." #name, unit, [](RunConfig& c) -> double& { return c.scenario.mixture.name; })
#define FLU(name, unit) real("fluid." #name, unit, [](RunConfig& c) -> double& { return c.scenario.fluid.name; })
#define INS(name, unit) real("insult." #name, unit, [](RunConfig& c) -> double& { return c.scenario.insult.name; })
#define GRD(name) integer("grid." #name, [](RunConfig& c) -> int& { return c.scenario.grid.name; })
#define CPL(name) real("coupling." #name, "", [](RunConfig& c) -> double& { return c.scenario.coupling.name; })
#define CPI(name) integer("coupling." #name, [](RunConfig& c) -> int& { return c.scenario.coupling.name; })

const std::vector<FieldSpec>& schema() {
  static const std::vector<FieldSpec> fields = [] {
    std::vector<FieldSpec> f;
    f.push_back(choice(
        "mode", "gr | fsge", [](RunConfig& c, const std::string& v) { c.scenario.mode = sim::mode_from_string(v); },
        [](const RunConfig& c) { return sim::to_string(c.scenario.mode); }));
    f.push_back(real("gain_ratio", "", [](RunConfig& c) -> double& { return c.scenario.gain_ratio; }));
    f.push_back(integer("workers", [](RunConfig& c) -> int& { return c.scenario.workers; }));
    f.push_back(choice(
        "preload", "reference | local",
        [](RunConfig& c, const std::string& v) { c.scenario.preload = sim::preload_from_string(v); },
        [](const RunConfig& c) { return sim::to_string(c.scenario.preload); }));

    f.push_back(MIX(a_o, "mm"));
    f.push_back(MIX(h_o, "mm"));
    f.push_back(MIX(l_o, "mm"));
    f.push_back(MIX(phi_e_o, ""));
    f.push_back(MIX(phi_m_o, ""));
    f.push_back(MIX(phi_c_o, ""));
    f.push_back(MIX(beta_theta, ""));
    f.push_back(MIX(beta_z, ""));
    f.push_back(MIX(beta_d, ""));
    f.push_back(real("mixture.alpha_0", "rad", [](RunConfig& c) -> double& { return c.scenario.mixture.alpha_0; },
                     Kind::Angle));
    f.push_back(MIX(c_e, "kPa"));
    f.push_back(MIX(c1_m, "kPa"));
    f.push_back(MIX(c2_m, ""));
    f.push_back(MIX(c1_c, "kPa"));
    f.push_back(MIX(c2_c, ""));
    f.push_back(MIX(G_e_theta, ""));
    f.push_back(MIX(G_e_z, ""));
    f.push_back(MIX(G_e_r, ""));
    f.push_back(MIX(G_m, ""));
    f.push_back(MIX(G_c, ""));
    f.push_back(MIX(eta, ""));
    f.push_back(MIX(k_support, "kPa/mm"));

    f.push_back(FLU(mu, "kg/(mm s)"));
    f.push_back(FLU(rho, "kg/mm^3"));
    f.push_back(FLU(u_in, "mm/s"));
    f.push_back(real("fluid.p_out", "kPa", [](RunConfig& c) -> double& { return c.scenario.fluid.p_out; },
                     Kind::Pressure));

    f.push_back(real("insult.theta_od", "rad", [](RunConfig& c) -> double& { return c.scenario.insult.theta_od; },
                     Kind::Angle));
    f.push_back(INS(nu_theta, ""));
    f.push_back(INS(z_od, "mm"));
    f.push_back(INS(nu_z, ""));
    f.push_back(INS(phi_e_hm, ""));
    f.push_back(integer("insult.t_max", [](RunConfig& c) -> int& { return c.scenario.insult.t_max; }));
    {
      FieldSpec s = spec("insult.axisymmetric", Kind::AutoBool, "true | false | \"auto\"");
      s.auto_flag = [](RunConfig& c) -> std::optional<bool>& { return c.scenario.insult.axisymmetric; };
      f.push_back(s);
    }

    f.push_back(GRD(n_theta));
    f.push_back(GRD(n_z));
    f.push_back(GRD(fluid_n_z));
    f.push_back(GRD(fluid_n_r));
    f.push_back(real("grid.fluid_wall_to_axis", "",
                     [](RunConfig& c) -> double& { return c.scenario.grid.fluid_wall_to_axis; }));

    f.push_back(choice(
        "coupling.scheme", "gauss_seidel | static | aitken | iqn_ils",
        [](RunConfig& c, const std::string& v) { c.scenario.coupling.scheme = coupling::scheme_from_string(v); },
        [](const RunConfig& c) { return coupling::to_string(c.scenario.coupling.scheme); }));
    f.push_back(CPL(omega));
    f.push_back(CPI(q));
    f.push_back(CPL(eps_qr));
    f.push_back(CPL(eps0));
    f.push_back(CPI(k_max));
    f.push_back(CPI(warmup_static_iters));

    f.push_back(choice(
        "output.dir", "path", [](RunConfig& c, const std::string& v) { c.out_dir = v; },
        [](const RunConfig& c) { return c.out_dir; }));
    f.push_back(flag("output.csv", [](RunConfig& c) -> bool& { return c.write_csv; }));
    f.push_back(flag("output.vtk", [](RunConfig& c) -> bool& { return c.write_vtk; }));
    {
      FieldSpec s = spec("sweep.gains", Kind::RealList, "");
      s.list = [](RunConfig& c) -> std::vector<double>& { return c.gains; };
      f.push_back(s);
    }
    return f;
  }();
  return fields;
}

#undef MIX
#undef FLU
#undef INS
#undef GRD
#undef CPL
#undef CPI

const FieldSpec* find(const std::string& path) {
  for (const auto& f : schema())
    if (f.path == path) return &f;
  return nullptr;
}

bool is_section(const std::string& path) {
  const std::string dotted = path + ".";
  for (const auto& f : schema())
    if (f.path.compare(0, dotted.size(), dotted) == 0) return true;
  return false;
}

double number_with_unit(const json& v, const std::string& path, Kind kind) {
  if (v.is_number()) return v.get<double>();
  if (!v.is_string() || (kind != Kind::Pressure && kind != Kind::Angle)) {
    throw InvalidParameter(path, "expected a number");
  }
  static const std::regex re(R"(^\s*([-+]?[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*([A-Za-z]+)\s*$)");
  std::smatch m;
  const std::string s = v.get<std::string>();
  if (!std::regex_match(s, m, re)) throw InvalidParameter(path, "cannot read '" + s + "' as a number with unit");
  const double x = std::stod(m[1]);
  const std::string unit = m[2];
  if (kind == Kind::Pressure) {
    if (unit == "mmHg") return x * mixture::kPaPerMmHg;
    if (unit == "kPa") return x;
    throw InvalidParameter(path, "unknown pressure unit '" + unit + "' (mmHg, kPa)");
  }
  if (unit == "deg") return x * mixture::kPi / 180.0;
  if (unit == "rad") return x;
  throw InvalidParameter(path, "unknown angle unit '" + unit + "' (deg, rad)");
}

void assign(RunConfig& cfg, const FieldSpec& f, const json& v) {
  const std::string& path = f.path;
  switch (f.kind) {
    case Kind::Real:
    case Kind::Pressure:
    case Kind::Angle: {
      const double x = number_with_unit(v, path, f.kind);
      if (!std::isfinite(x)) throw InvalidParameter(path, "must be finite");
      f.real(cfg) = x;
      break;
    }
    case Kind::Int:
      if (!v.is_number_integer()) throw InvalidParameter(path, "expected an integer");
      f.integer(cfg) = v.get<int>();
      break;
    case Kind::Bool:
      if (!v.is_boolean()) throw InvalidParameter(path, "expected true or false");
      f.flag(cfg) = v.get<bool>();
      break;
    case Kind::AutoBool:
      if (v.is_boolean()) {
        f.auto_flag(cfg) = v.get<bool>();
      } else if (v.is_string() && v.get<std::string>() == "auto") {
        f.auto_flag(cfg).reset();
      } else {
        throw InvalidParameter(path, "expected true, false or \"auto\"");
      }
      break;
    case Kind::Choice:
      if (!v.is_string()) throw InvalidParameter(path, "expected a string (" + f.unit + ")");
      try {
        f.set_choice(cfg, v.get<std::string>());
      } catch (const InvalidParameter& e) {
        if (e.field() == path) throw;
        throw InvalidParameter(path, e.what());
      }
      break;
    case Kind::RealList: {
      if (!v.is_array()) throw InvalidParameter(path, "expected a list of numbers");
      std::vector<double> xs;
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) throw InvalidParameter(path + "[" + std::to_string(i) + "]", "expected a number");
        xs.push_back(v[i].get<double>());
      }
      f.list(cfg) = std::move(xs);
      break;
    }
  }
}

void walk(RunConfig& cfg, const json& obj, const std::string& prefix) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (const FieldSpec* f = find(path)) {
      assign(cfg, *f, it.value());
      cfg.explicit_keys.insert(path);
    } else if (is_section(path)) {
      if (!it.value().is_object()) throw InvalidParameter(path, "expected an object");
      walk(cfg, it.value(), path);
    } else {
      throw InvalidParameter(path, "unknown key");
    }
  }
}

std::string shortest(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

std::string value_text(RunConfig& cfg, const FieldSpec& f) {
  switch (f.kind) {
    case Kind::Real:
    case Kind::Pressure:
    case Kind::Angle:
      return shortest(f.real(cfg));
    case Kind::Int:
      return std::to_string(f.integer(cfg));
    case Kind::Bool:
      return f.flag(cfg) ? "true" : "false";
    case Kind::AutoBool: {
      const auto& v = f.auto_flag(cfg);
      return v ? (*v ? "true" : "false") : "\"auto\"";
    }
    case Kind::Choice:
      return json(f.get_choice(cfg)).dump();
    case Kind::RealList: {
      std::string s = "[";
      for (std::size_t i = 0; i < f.list(cfg).size(); ++i) s += (i ? ", " : "") + shortest(f.list(cfg)[i]);
      return s + "]";
    }
  }
  return "";
}

std::string annotation(RunConfig& cfg, const FieldSpec& f, bool is_default) {
  std::string note = f.unit;
  if (f.kind == Kind::Pressure) note += " (" + shortest(f.real(cfg) / mixture::kPaPerMmHg) + " mmHg)";
  if (f.kind == Kind::Angle) note += " (" + shortest(f.real(cfg) * 180.0 / mixture::kPi) + " deg)";
  if (is_default) note += note.empty() ? "default" : ", default";
  return note;
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw InvalidParameter("<syntax>", e.what());
  }
  RunConfig cfg;
  if (doc.is_null()) doc = json::object();
  if (!doc.is_object()) throw InvalidParameter("<root>", "expected a JSON object");
  walk(cfg, doc, "");
  auto& mix = cfg.scenario.mixture;
  if (!cfg.explicit_keys.count("mixture.G_e_r")) mix.G_e_r = 1.0 / (mix.G_e_theta * mix.G_e_z);
  if (!cfg.explicit_keys.count("insult.z_od")) cfg.scenario.insult.z_od = mix.l_o / 4.0;
  cfg.scenario.validate();
  if (cfg.gains.empty()) throw InvalidParameter("sweep.gains", "needs at least one gain");
  for (std::size_t i = 0; i < cfg.gains.size(); ++i) {
    if (!(cfg.gains[i] >= 0.0) || !std::isfinite(cfg.gains[i])) {
      throw InvalidParameter("sweep.gains[" + std::to_string(i) + "]", "must be finite and >= 0");
    }
  }
  if (cfg.out_dir.empty()) throw InvalidParameter("output.dir", "must not be empty");
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParameter("--config", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string print_config(const RunConfig& cfg_in) {
  RunConfig cfg = cfg_in;
  std::ostringstream out;
  out << "{\n";
  const auto& fields = schema();
  std::string section;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const FieldSpec& f = fields[i];
    const auto dot = f.path.find('.');
    const std::string sec = dot == std::string::npos ? "" : f.path.substr(0, dot);
    const std::string key = dot == std::string::npos ? f.path : f.path.substr(dot + 1);
    if (sec != section) {
      if (!section.empty()) out << "  },\n";
      if (!sec.empty()) out << "  \"" << sec << "\": {\n";
      section = sec;
    }
    const bool last_in_section =
        i + 1 == fields.size() ||
        (fields[i + 1].path.find('.') == std::string::npos ? std::string() : fields[i + 1].path.substr(0, fields[i + 1].path.find('.'))) != sec;
    const std::string indent = sec.empty() ? "  " : "    ";
    const bool trailing_comma = sec.empty() ? true : !last_in_section;
    const std::string note = annotation(cfg, f, !cfg.explicit_keys.count(f.path));
    out << indent << "\"" << key << "\": " << value_text(cfg, f) << (trailing_comma ? "," : "");
    if (!note.empty()) out << "  // " << note;
    out << "\n";
  }
  if (!section.empty()) out << "  }\n";
  out << "}\n";
  return out.str();
}

}  // namespace fsge::cli
