#include "mstate/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "mstate/errors.hpp"

namespace mstate {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::SpecInvalid, msg); }

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) invalid(where + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) invalid("unknown key '" + key + "' in " + where);
  }
}

double number(const json& obj, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) invalid("'" + key + "' must be a number");
  return obj[key].get<double>();
}

Point vector_of(const json& arr, int dim, const std::string& where) {
  if (!arr.is_array() || static_cast<int>(arr.size()) != dim) {
    invalid(where + " must be an array of length " + std::to_string(dim));
  }
  Point v(dim);
  for (int i = 0; i < dim; ++i) v(i) = arr[i].get<double>();
  return v;
}

Eigen::MatrixXd columns_of(const json& arr, int dim, const std::string& where) {
  if (!arr.is_array() || arr.empty()) invalid(where + " must be a non-empty list of vectors");
  Eigen::MatrixXd m(dim, arr.size());
  for (std::size_t c = 0; c < arr.size(); ++c) m.col(c) = vector_of(arr[c], dim, where);
  return m;
}

ScalarField scalar_preset(const json& obj, int dim, const std::string& where, double default_rho) {
  check_keys(obj, {"preset", "params", "rho"}, where);
  if (!obj.contains("preset")) invalid(where + " needs a preset");
  const std::string preset = obj["preset"].get<std::string>();
  const json params = obj.value("params", json::object());
  const double rho = number(obj, "rho", default_rho);
  const Point origin = Point::Zero(dim);
  if (preset == "coulomb_like") {
    check_keys(params, {"strength", "rho", "center"}, where + ".params");
    const Point c = params.contains("center") ? vector_of(params["center"], dim, where + ".center") : origin;
    return coulomb_like(number(params, "strength", 1.0), number(params, "rho", rho), c);
  }
  if (preset == "gaussian") {
    check_keys(params, {"strength", "width", "center"}, where + ".params");
    const Point c = params.contains("center") ? vector_of(params["center"], dim, where + ".center") : origin;
    const double width = number(params, "width", 1.0);
    if (!(width > 0.0)) invalid(where + ": gaussian width must be positive");
    return gaussian(number(params, "strength", 1.0), width, c);
  }
  if (preset == "constant") {
    check_keys(params, {"value"}, where + ".params");
    return constant_field(number(params, "value", 0.0), dim);
  }
  invalid("unknown scalar preset '" + preset + "' in " + where);
}

AngularProfile angular_preset(const json& obj, const std::string& where) {
  check_keys(obj, {"preset", "params"}, where);
  const std::string preset = obj.value("preset", "");
  const json params = obj.value("params", json::object());
  if (preset == "cosine_homogeneous") {
    check_keys(params, {"offset", "amplitude", "power", "phase"}, where + ".params");
    const double power = number(params, "power", 1.0);
    if (power < 0 || power != std::floor(power)) invalid(where + ": power must be a non-negative integer");
    return cosine_profile(number(params, "offset", 0.0), number(params, "amplitude", 1.0), static_cast<int>(power),
                          number(params, "phase", 0.0));
  }
  if (preset == "constant") {
    check_keys(params, {"value"}, where + ".params");
    return constant_profile(number(params, "value", 0.0));
  }
  invalid("unknown homogeneous preset '" + preset + "' in " + where);
}

// Resolves "element" (index) or "subspace" (spanning vectors of X_b).
int resolve_element(const json& obj, const SubspaceLattice& lattice, const std::string& where) {
  if (obj.contains("element")) {
    const int e = obj["element"].get<int>();
    if (e < 0 || e >= lattice.size()) invalid(where + ": element index out of range");
    return e;
  }
  if (obj.contains("subspace")) {
    const auto s = Subspace::from_spanning(columns_of(obj["subspace"], lattice.ambient_dim(), where + ".subspace"));
    const int e = lattice.find(s);
    if (e < 0) invalid(where + ": subspace is not a lattice element");
    return e;
  }
  invalid(where + " needs 'element' or 'subspace'");
}

}  // namespace

ScalarField coulomb_like(double strength, double rho, const Point& center) {
  ScalarField f;
  f.preset = "coulomb_like";
  f.decay_rate = rho;
  f.value = [=](const Point& y) { return strength * std::pow(1.0 + (y - center).squaredNorm(), -0.5 * rho); };
  f.gradient = [=](const Point& y) -> Point {
    const Point d = y - center;
    return -rho * strength * std::pow(1.0 + d.squaredNorm(), -0.5 * rho - 1.0) * d;
  };
  return f;
}

ScalarField gaussian(double strength, double width, const Point& center) {
  ScalarField f;
  f.preset = "gaussian";
  f.decay_rate = std::numeric_limits<double>::infinity();
  const double w2 = width * width;
  f.value = [=](const Point& y) { return strength * std::exp(-(y - center).squaredNorm() / w2); };
  f.gradient = [=](const Point& y) -> Point {
    const Point d = y - center;
    return -2.0 / w2 * strength * std::exp(-d.squaredNorm() / w2) * d;
  };
  return f;
}

ScalarField constant_field(double value, int dim) {
  ScalarField f;
  f.preset = "constant";
  f.value = [value](const Point&) { return value; };
  f.gradient = [dim](const Point&) -> Point { return Point::Zero(dim); };
  return f;
}

AngularProfile cosine_profile(double offset, double amplitude, int power, double phase) {
  AngularProfile p;
  p.preset = "cosine_homogeneous";
  p.value = [=](double th) { return offset + amplitude * std::pow(std::cos(th - phase), power); };
  p.derivative = [=](double th) {
    if (power == 0) return 0.0;
    return -amplitude * power * std::pow(std::cos(th - phase), power - 1) * std::sin(th - phase);
  };
  return p;
}

AngularProfile constant_profile(double value) {
  AngularProfile p;
  p.preset = "constant";
  p.value = [value](double) { return value; };
  p.derivative = [](double) { return 0.0; };
  return p;
}

VectorField directional(const ScalarField& f, const Point& direction) {
  VectorField v;
  v.preset = f.preset;
  v.decay_rate = f.decay_rate;
  auto value = f.value;
  v.value = [value, direction](const Point& x) -> Point { return value(x) * direction; };
  return v;
}

ScalarField compose(const ScalarField& f, const Eigen::MatrixXd& coordinates) {
  ScalarField g;
  g.preset = f.preset;
  g.decay_rate = f.decay_rate;
  auto value = f.value;
  auto gradient = f.gradient;
  g.value = [value, coordinates](const Point& x) { return value(coordinates.transpose() * x); };
  g.gradient = [gradient, coordinates](const Point& x) -> Point {
    return coordinates * gradient(coordinates.transpose() * x);
  };
  return g;
}

static ProblemSpec parse_spec(const json& config) {
  check_keys(config, {"ambient_dim", "mode", "channels", "couplings", "lattice"}, "config");
  ProblemSpec spec;
  try {
    spec.ambient_dim = config.at("ambient_dim").get<int>();
    spec.mode = mode_from_string(config.value("mode", "decaying"));
  } catch (const json::exception& e) {
    invalid(std::string("config: ") + e.what());
  }
  const int n = spec.ambient_dim;
  if (n < 1 || n > 3) invalid("ambient_dim must be 1, 2 or 3");

  if (config.contains("lattice")) {
    const json& lat = config["lattice"];
    check_keys(lat, {"generators"}, "lattice");
    std::vector<Subspace> generators;
    for (const auto& g : lat.at("generators")) generators.push_back(Subspace::from_spanning(columns_of(g, n, "generator")));
    spec.lattice = generate_lattice(generators, n);
  }

  if (!config.contains("channels") || !config["channels"].is_array()) invalid("'channels' must be an array");
  spec.channels = static_cast<int>(config["channels"].size());
  for (std::size_t j = 0; j < config["channels"].size(); ++j) {
    const json& ch = config["channels"][j];
    const std::string where = "channels[" + std::to_string(j) + "]";
    check_keys(ch, {"constant", "homogeneous", "decaying", "manybody"}, where);
    ChannelPotential p;
    p.constant = number(ch, "constant", 0.0);
    if (ch.contains("homogeneous")) p.homogeneous = HomogeneousPotential(angular_preset(ch["homogeneous"], where + ".homogeneous"));
    if (ch.contains("decaying")) p.decaying = scalar_preset(ch["decaying"], n, where + ".decaying", 1.0);
    if (ch.contains("manybody")) {
      if (!spec.lattice) invalid(where + ": many-body terms need a lattice");
      for (std::size_t t = 0; t < ch["manybody"].size(); ++t) {
        const json& term = ch["manybody"][t];
        const std::string tw = where + ".manybody[" + std::to_string(t) + "]";
        check_keys(term, {"element", "subspace", "coordinates", "preset", "params", "rho"}, tw);
        ManyBodyTerm mb;
        mb.element = resolve_element(term, *spec.lattice, tw);
        mb.coordinates = term.contains("coordinates") ? columns_of(term["coordinates"], n, tw + ".coordinates")
                                                      : spec.lattice->element(mb.element).complement().basis();
        json field = json::object();
        for (const char* key : {"preset", "params", "rho"}) {
          if (term.contains(key)) field[key] = term[key];
        }
        mb.field = compose(scalar_preset(field, static_cast<int>(mb.coordinates.cols()), tw, 1.0), mb.coordinates);
        p.manybody_terms.push_back(std::move(mb));
      }
    }
    spec.potentials.push_back(std::move(p));
  }

  if (config.contains("couplings")) {
    for (std::size_t c = 0; c < config["couplings"].size(); ++c) {
      const json& cj = config["couplings"][c];
      const std::string where = "couplings[" + std::to_string(c) + "]";
      check_keys(cj, {"j", "k", "kind", "preset", "params", "rho", "direction", "element", "subspace", "coordinates"},
                 where);
      CouplingTerm term;
      term.j = cj.at("j").get<int>() - 1;
      term.k = cj.at("k").get<int>() - 1;
      if (term.j == term.k) invalid(where + ": couplings connect distinct channels");
      Eigen::MatrixXd coords = Eigen::MatrixXd::Identity(n, n);
      if (spec.mode == Mode::ManyBody) {
        if (!spec.lattice) invalid(where + ": many-body couplings need a lattice");
        term.element = resolve_element(cj, *spec.lattice, where);
        coords = cj.contains("coordinates") ? columns_of(cj["coordinates"], n, where + ".coordinates")
                                            : spec.lattice->element(*term.element).complement().basis();
        term.coordinates = coords;
      }
      json field = json::object();
      for (const char* key : {"preset", "params", "rho"}) {
        if (cj.contains(key)) field[key] = cj[key];
      }
      const ScalarField f = compose(scalar_preset(field, static_cast<int>(coords.cols()), where, 1.0), coords);
      term.decay_rate = f.decay_rate;
      const std::string kind = cj.value("kind", "scalar");
      if (kind == "scalar") {
        if (cj.contains("direction")) invalid(where + ": 'direction' only applies to first_order couplings");
        term.r_hat = f;
      } else if (kind == "first_order") {
        term.r_tilde = directional(f, vector_of(cj.at("direction"), n, where + ".direction"));
      } else {
        invalid(where + ": kind must be 'scalar' or 'first_order'");
      }
      spec.couplings.push_back(std::move(term));
    }
  }
  spec.validate();
  return spec;
}

ProblemSpec spec_from_json(const json& config) {
  try {
    return parse_spec(config);
  } catch (const json::exception& e) {
    invalid(std::string("config: ") + e.what());
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::SpecInvalid, path + ": " + e.what());
  }
}

ProblemSpec load_spec(const std::string& path) { return spec_from_json(read_json_file(path)); }

}  // namespace mstate
