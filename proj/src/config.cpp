#include "contactdyn/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace contactdyn {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& s, int line, const std::string& key) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("line " + std::to_string(line) + ": field '" + key +
                          "' expects a number, got '" + s + "'",
                      line, key);
  }
}

long long parse_integer(const std::string& s, int line, const std::string& key) {
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ConfigError("line " + std::to_string(line) + ": field '" + key +
                          "' expects an integer, got '" + s + "'",
                      line, key);
  return v;
}

}  // namespace

Potential parse_potential(const std::string& text, int dim) {
  std::vector<TrigTerm> terms;
  std::size_t i = 0;
  const auto n = text.size();
  auto skip_ws = [&] { while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) ++i; };
  auto fail = [&](const std::string& what) -> void {
    throw DomainError("potential: " + what + " at position " + std::to_string(i) + " in '" +
                      text + "'");
  };

  double pending_sign = 1.0;
  bool expect_term = true;
  skip_ws();
  if (i >= n) fail("empty expression");
  while (i < n) {
    skip_ws();
    if (!expect_term) {
      if (text[i] == '+') {
        pending_sign = 1.0;
      } else if (text[i] == '-') {
        pending_sign = -1.0;
      } else {
        fail("expected '+' or '-'");
      }
      ++i;
      expect_term = true;
      continue;
    }
    // optional sign on the first term
    if (text[i] == '+' || text[i] == '-') {
      pending_sign = text[i] == '-' ? -pending_sign : pending_sign;
      ++i;
      skip_ws();
    }
    // optional coefficient
    double coef = 1.0;
    bool have_coef = false;
    {
      std::size_t j = i;
      while (j < n && (std::isdigit(static_cast<unsigned char>(text[j])) || text[j] == '.' ||
                       text[j] == 'e' || text[j] == 'E' ||
                       ((text[j] == '+' || text[j] == '-') && j > i &&
                        (text[j - 1] == 'e' || text[j - 1] == 'E'))))
        ++j;
      if (j > i) {
        coef = std::stod(text.substr(i, j - i));
        have_coef = true;
        i = j;
        skip_ws();
        if (i < n && text[i] == '*') {
          ++i;
          skip_ws();
        }
      }
    }
    // function or bare constant
    if (i + 3 <= n && (text.compare(i, 3, "cos") == 0 || text.compare(i, 3, "sin") == 0)) {
      const bool is_cos = text[i] == 'c';
      i += 3;
      skip_ws();
      if (i >= n || text[i] != '(') fail("expected '('");
      ++i;
      TrigTerm term;
      for (int a = 0; a < dim; ++a) {
        skip_ws();
        std::size_t j = i;
        if (j < n && (text[j] == '+' || text[j] == '-')) ++j;
        while (j < n && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
        if (j == i) fail("expected an integer frequency");
        term.freq[a] = static_cast<int>(std::stol(text.substr(i, j - i)));
        i = j;
        skip_ws();
        if (a + 1 < dim) {
          if (i >= n || text[i] != ',') fail("expected ',' between frequencies");
          ++i;
        }
      }
      if (i >= n || text[i] != ')') fail("expected ')'");
      ++i;
      (is_cos ? term.cos_amp : term.sin_amp) = pending_sign * coef;
      terms.push_back(term);
    } else if (have_coef) {
      TrigTerm term;
      term.cos_amp = pending_sign * coef;  // constant: zero frequency
      terms.push_back(term);
    } else {
      fail("expected a term");
    }
    pending_sign = 1.0;
    expect_term = false;
    skip_ws();
  }
  if (expect_term) fail("dangling operator");
  return Potential(dim, std::move(terms));
}

ExperimentConfig parse_config_text(const std::string& text) {
  std::map<std::string, std::pair<std::string, int>> kv;
  {
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      const auto hash = raw.find('#');
      std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'", line_no,
                          "");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty() || value.empty())
        throw ConfigError("line " + std::to_string(line_no) + ": empty key or value", line_no, key);
      if (kv.count(key))
        throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'",
                          line_no, key);
      kv[key] = {value, line_no};
    }
  }

  static const std::set<std::string> known = {
      "schema_version",
      "model.family", "model.dim", "model.lambda", "model.monotone_sign",
      "model.kinetic_scale", "model.potential",
      "grid.n",
      "flow.rel_tol", "flow.abs_tol", "flow.max_step", "flow.t_final", "flow.direction",
      "flow.blow_up_radius", "flow.equilibrium_tol", "flow.x0", "flow.p0", "flow.u0",
      "attractor.delta", "attractor.t", "attractor.n_samples", "attractor.seed",
      "structure.eps", "structure.tol_struct", "structure.seed_density",
      "output.directory", "output.formats",
  };
  for (const auto& [key, vp] : kv)
    if (!known.count(key))
      throw ConfigError("line " + std::to_string(vp.second) + ": unknown key '" + key + "'",
                        vp.second, key);

  auto get = [&](const std::string& key) -> std::optional<std::pair<std::string, int>> {
    const auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    return it->second;
  };
  auto require = [&](const std::string& key) {
    const auto v = get(key);
    if (!v) throw ConfigError("missing required key '" + key + "'", 0, key);
    return *v;
  };

  ExperimentConfig cfg;
  cfg.source_text = text;

  {
    const auto [v, ln] = require("schema_version");
    cfg.schema_version = static_cast<int>(parse_integer(v, ln, "schema_version"));
    if (cfg.schema_version != 1)
      throw ConfigError("unsupported schema_version " + v, ln, "schema_version");
  }

  // model section
  {
    const auto [fam, ln] = require("model.family");
    if (fam == "Mechanical")
      cfg.model.family = Family::Mechanical;
    else if (fam == "Discounted")
      cfg.model.family = Family::Discounted;
    else if (fam == "QuadraticTest")
      cfg.model.family = Family::QuadraticTest;
    else
      throw ConfigError("line " + std::to_string(ln) + ": unknown family '" + fam + "'", ln,
                        "model.family");
  }
  if (const auto v = get("model.dim"))
    cfg.model.dim = static_cast<int>(parse_integer(v->first, v->second, "model.dim"));
  if (cfg.model.dim < 1 || cfg.model.dim > 2)
    throw ConfigError("model.dim must be 1 or 2", 0, "model.dim");
  {
    const auto [v, ln] = require("model.lambda");
    cfg.model.lambda = parse_number(v, ln, "model.lambda");
    if (!(cfg.model.lambda > 0.0))
      throw ConfigError("line " + std::to_string(ln) + ": model.lambda must be > 0", ln,
                        "model.lambda");
  }
  if (const auto v = get("model.monotone_sign")) {
    if (v->first == "Minus")
      cfg.model.sign = MonotoneSign::Minus;
    else if (v->first == "Plus")
      cfg.model.sign = MonotoneSign::Plus;
    else
      throw ConfigError("line " + std::to_string(v->second) + ": monotone_sign is Minus or Plus",
                        v->second, "model.monotone_sign");
  }
  if (const auto v = get("model.kinetic_scale")) {
    cfg.model.kinetic_scale = parse_number(v->first, v->second, "model.kinetic_scale");
    if (!(cfg.model.kinetic_scale > 0.0))
      throw ConfigError("model.kinetic_scale must be > 0", v->second, "model.kinetic_scale");
  }
  {
    const auto [v, ln] = require("model.potential");
    try {
      cfg.model.potential = parse_potential(v, cfg.model.dim);
    } catch (const DomainError& err) {
      throw ConfigError("line " + std::to_string(ln) + ": " + err.what(), ln, "model.potential");
    }
  }

  if (const auto v = get("grid.n")) {
    cfg.grid_n = static_cast<int>(parse_integer(v->first, v->second, "grid.n"));
    const bool pow2 = cfg.grid_n >= 32 && (cfg.grid_n & (cfg.grid_n - 1)) == 0;
    if (!pow2)
      throw ConfigError("line " + std::to_string(v->second) + ": grid.n must be a power of two >= 32",
                        v->second, "grid.n");
  }

  // flow section
  auto num = [&](const char* key, double& dst, bool positive) {
    if (const auto v = get(key)) {
      dst = parse_number(v->first, v->second, key);
      if (positive && !(dst > 0.0))
        throw ConfigError("line " + std::to_string(v->second) + ": " + key + " must be > 0",
                          v->second, key);
    }
  };
  num("flow.rel_tol", cfg.flow.rel_tol, true);
  num("flow.abs_tol", cfg.flow.abs_tol, true);
  num("flow.max_step", cfg.flow.max_step, true);
  num("flow.t_final", cfg.flow.t_final, true);
  num("flow.blow_up_radius", cfg.flow.blow_up_radius, true);
  num("flow.equilibrium_tol", cfg.flow.equilibrium_tol, true);
  if (const auto v = get("flow.direction")) {
    if (v->first == "forward")
      cfg.flow.direction = Direction::Forward;
    else if (v->first == "backward")
      cfg.flow.direction = Direction::Backward;
    else
      throw ConfigError("line " + std::to_string(v->second) + ": direction is forward or backward",
                        v->second, "flow.direction");
  }
  auto vec = [&](const char* key, VecN& dst) {
    if (const auto v = get(key)) {
      std::vector<double> vals;
      std::istringstream ss(v->first);
      std::string tok;
      while (std::getline(ss, tok, ',')) vals.push_back(parse_number(trim(tok), v->second, key));
      if (static_cast<int>(vals.size()) != cfg.model.dim)
        throw ConfigError("line " + std::to_string(v->second) + ": " + key + " needs " +
                              std::to_string(cfg.model.dim) + " comma-separated values",
                          v->second, key);
      dst.resize(cfg.model.dim);
      for (int a = 0; a < cfg.model.dim; ++a) dst[a] = vals[a];
    }
  };
  vec("flow.x0", cfg.flow_x0);
  vec("flow.p0", cfg.flow_p0);
  if (const auto v = get("flow.u0")) cfg.flow_u0 = parse_number(v->first, v->second, "flow.u0");
  cfg.flow_initial_set = cfg.flow_x0.size() == cfg.model.dim && cfg.flow_p0.size() == cfg.model.dim;

  // attractor section
  num("attractor.delta", cfg.attractor_delta, true);
  num("attractor.t", cfg.attractor_t, true);
  if (const auto v = get("attractor.n_samples")) {
    cfg.attractor_n_samples = parse_integer(v->first, v->second, "attractor.n_samples");
    if (cfg.attractor_n_samples < 0)
      throw ConfigError("attractor.n_samples must be >= 0", v->second, "attractor.n_samples");
  }
  if (const auto v = get("attractor.seed"))
    cfg.attractor_seed =
        static_cast<std::uint64_t>(parse_integer(v->first, v->second, "attractor.seed"));

  // structure section
  num("structure.eps", cfg.structure_eps, true);
  num("structure.tol_struct", cfg.structure_tol, true);
  if (const auto v = get("structure.seed_density")) {
    cfg.structure_seed_density =
        static_cast<int>(parse_integer(v->first, v->second, "structure.seed_density"));
    if (cfg.structure_seed_density < 2)
      throw ConfigError("structure.seed_density must be >= 2", v->second, "structure.seed_density");
  }

  // output section
  if (const auto v = get("output.directory")) cfg.output_directory = v->first;
  if (const auto v = get("output.formats")) {
    cfg.output_formats.clear();
    std::istringstream ss(v->first);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      tok = trim(tok);
      if (tok != "csv" && tok != "json")
        throw ConfigError("line " + std::to_string(v->second) + ": unknown format '" + tok + "'",
                          v->second, "output.formats");
      cfg.output_formats.insert(tok);
    }
    if (cfg.output_formats.empty())
      throw ConfigError("output.formats must name csv and/or json", v->second, "output.formats");
  }

  // Constructing the model validates the cross-field invariants.
  try {
    (void)cfg.make_model();
  } catch (const DomainError& err) {
    throw ConfigError(std::string("invalid model section: ") + err.what(), 0, "model");
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace contactdyn
