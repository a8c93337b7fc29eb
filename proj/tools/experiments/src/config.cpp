#include "locball/experiments/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <type_traits>
#include <variant>

namespace locball::experiments {

namespace {

using Member = std::variant<std::string ExperimentConfig::*, int ExperimentConfig::*,
                            std::size_t ExperimentConfig::*, double ExperimentConfig::*,
                            std::vector<double> ExperimentConfig::*,
                            std::vector<int> ExperimentConfig::*>;

// The seed is stored through the std::size_t alternative.
static_assert(std::is_same_v<Seed, std::size_t>);

struct Field {
  const char* section;
  const char* key;
  Member member;
};

const std::vector<Field>& fields() {
  using C = ExperimentConfig;
  static const std::vector<Field> table{
      {"experiment", "name", &C::experiment},
      {"experiment", "seed", &C::seed},
      {"experiment", "output_dir", &C::output_dir},
      {"experiment", "criteria", &C::criteria},
      {"family", "kind", &C::family},
      {"family", "dimension", &C::dimension},
      {"family", "transform", &C::transform},
      {"family", "c0_constant", &C::c0_constant},
      {"parameters", "horizon", &C::horizon},
      {"parameters", "dt", &C::dt},
      {"parameters", "paths", &C::paths},
      {"parameters", "backend", &C::backend},
      {"parameters", "budget", &C::budget},
      {"parameters", "region_budget", &C::region_budget},
      {"parameters", "samples", &C::samples},
      {"parameters", "record_every", &C::record_every},
      {"parameters", "epsilons", &C::epsilons},
      {"parameters", "slice_epsilons", &C::slice_epsilons},
      {"parameters", "lambda", &C::lambda},
      {"parameters", "c1", &C::c1},
      {"parameters", "radius", &C::radius},
      {"parameters", "exponents", &C::exponents},
      {"parameters", "directions", &C::directions},
      {"parameters", "times", &C::times},
      {"parameters", "t_values", &C::t_values},
      {"parameters", "p_max", &C::p_max},
      {"parameters", "body", &C::body},
      {"parameters", "c_reference", &C::c_reference},
      {"parameters", "c_universal", &C::c_universal},
      {"parameters", "b", &C::b},
      {"parameters", "psi_sq", &C::psi_sq},
      {"parameters", "spectrum", &C::spectrum},
  };
  return table;
}

const Field* find_field(const std::string& section, const std::string& key) {
  for (const auto& f : fields()) {
    if (section == f.section && key == f.key) return &f;
  }
  return nullptr;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

// INI scalars and comma-separated lists become JSON values of the field type.
nlohmann::json text_to_json(const Member& member, const std::string& raw) {
  const std::string text = trim(raw);
  auto number = [&](const std::string& s) -> nlohmann::json {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  };
  auto list = [&]() {
    nlohmann::json arr = nlohmann::json::array();
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) arr.push_back(number(item));
    }
    return arr;
  };
  return std::visit(
      [&](auto m) -> nlohmann::json {
        using T = std::remove_reference_t<decltype(std::declval<ExperimentConfig>().*m)>;
        if constexpr (std::is_same_v<T, std::string>) {
          return text;
        } else if constexpr (std::is_same_v<T, std::vector<double>> || std::is_same_v<T, std::vector<int>>) {
          return list();
        } else if constexpr (std::is_integral_v<T>) {
          std::size_t used = 0;
          if constexpr (std::is_unsigned_v<T>) {
            if (text.empty() || text.front() == '-') throw std::invalid_argument(text);
            const unsigned long long v = std::stoull(text, &used);
            if (used != text.size()) throw std::invalid_argument(text);
            return static_cast<T>(v);
          } else {
            const long long v = std::stoll(text, &used);
            if (used != text.size()) throw std::invalid_argument(text);
            return v;
          }
        } else {
          return number(text);
        }
      },
      member);
}

// Writes a JSON value into the member; returns a problem description or "".
std::string assign(ExperimentConfig& c, const Field& f, const nlohmann::json& v) {
  const std::string where = std::string(f.section) + "." + f.key;
  return std::visit(
      [&](auto m) -> std::string {
        using T = std::remove_reference_t<decltype(c.*m)>;
        if constexpr (std::is_same_v<T, std::string>) {
          if (!v.is_string()) return where + ": expected a string";
          c.*m = v.get<std::string>();
        } else if constexpr (std::is_same_v<T, std::vector<double>>) {
          if (!v.is_array()) return where + ": expected a list of numbers";
          T out;
          for (const auto& x : v) {
            if (!x.is_number()) return where + ": expected a list of numbers";
            out.push_back(x.get<double>());
          }
          c.*m = out;
        } else if constexpr (std::is_same_v<T, std::vector<int>>) {
          if (!v.is_array()) return where + ": expected a list of integers";
          T out;
          for (const auto& x : v) {
            if (!x.is_number() || std::floor(x.get<double>()) != x.get<double>()) {
              return where + ": expected a list of integers";
            }
            out.push_back(x.get<int>());
          }
          c.*m = out;
        } else if constexpr (std::is_same_v<T, double>) {
          if (!v.is_number()) return where + ": expected a number";
          c.*m = v.get<double>();
        } else {
          if (!v.is_number()) return where + ": expected an integer";
          const double d = v.get<double>();
          if (std::floor(d) != d) return where + ": expected an integer";
          if (std::is_unsigned_v<T> && d < 0) return where + ": must be nonnegative";
          if (v.is_number_unsigned()) c.*m = static_cast<T>(v.get<std::uint64_t>());
          else if (v.is_number_integer()) c.*m = static_cast<T>(v.get<std::int64_t>());
          else c.*m = static_cast<T>(d);
        }
        return "";
      },
      f.member);
}

nlohmann::json member_json(const ExperimentConfig& c, const Field& f) {
  return std::visit([&](auto m) -> nlohmann::json { return c.*m; }, f.member);
}

[[noreturn]] void fail(const std::vector<std::string>& problems) {
  std::string msg = "invalid configuration:";
  for (const auto& p : problems) msg += "\n  - " + p;
  throw Error("cli", msg);
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{
      "reduce",           "localize",         "smallball",          "bounds",
      "verify.martingale", "verify.covbound", "verify.borell",      "verify.subgaussian",
      "verify.shrinkage", "verify.guan",      "verify.subspace",    "certificate",
      "slicing",          "replicate-all",
  };
  return names;
}

std::vector<std::string> ExperimentConfig::problems() const {
  std::vector<std::string> out;
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), experiment) == names.end()) {
    std::string list;
    for (const auto& n : names) list += (list.empty() ? "" : ", ") + n;
    out.push_back("experiment.name: unknown experiment '" + experiment + "' (valid: " + list + ")");
  }
  auto positive = [&](const char* key, double v) {
    if (!(v > 0.0)) out.push_back(std::string(key) + ": must be positive");
  };
  if (dimension < 1) out.push_back("family.dimension: must be a positive integer");
  if (transform != "none" && transform != "symmetrize" && transform != "reduce") {
    out.push_back("family.transform: expected none, symmetrize or reduce");
  }
  const std::vector<std::string> families{"gaussian", "uniform_cube", "cube", "uniform_ball", "ball",
                                          "uniform_simplex", "simplex", "product_laplace", "laplace"};
  if (std::find(families.begin(), families.end(), family) == families.end()) {
    out.push_back("family.kind: unknown family '" + family + "'");
  }
  positive("family.c0_constant", c0_constant);
  positive("parameters.horizon", horizon);
  positive("parameters.dt", dt);
  if (dt > horizon) out.push_back("parameters.dt: must not exceed the horizon");
  positive("parameters.paths", static_cast<double>(paths));
  positive("parameters.budget", static_cast<double>(budget));
  positive("parameters.region_budget", static_cast<double>(region_budget));
  positive("parameters.samples", static_cast<double>(samples));
  positive("parameters.record_every", static_cast<double>(record_every));
  positive("parameters.directions", static_cast<double>(directions));
  if (backend != "auto" && backend != "closed_form" && backend != "quadrature" && backend != "sampling") {
    out.push_back("parameters.backend: expected auto, closed_form, quadrature or sampling");
  }
  if (epsilons.empty()) out.push_back("parameters.epsilons: must not be empty");
  for (double e : epsilons) {
    if (!(e > 0.0 && e < 1.0)) {
      out.push_back("parameters.epsilons: every value must lie in (0, 1)");
      break;
    }
  }
  if (slice_epsilons.empty()) out.push_back("parameters.slice_epsilons: must not be empty");
  for (double e : slice_epsilons) {
    if (!(e > 0.0)) {
      out.push_back("parameters.slice_epsilons: every value must be positive");
      break;
    }
  }
  if (!(lambda > 1.0)) out.push_back("parameters.lambda: must exceed 1");
  if (!(c1 > 0.0 && c1 <= 1.0)) out.push_back("parameters.c1: must lie in (0, 1]");
  if (radius < 0.0) out.push_back("parameters.radius: must be nonnegative");
  for (double p : exponents) {
    if (!(p >= 2.0)) {
      out.push_back("parameters.exponents: every exponent must be at least 2");
      break;
    }
  }
  for (double t : times) {
    if (!(t > 0.0)) {
      out.push_back("parameters.times: every time must be positive");
      break;
    }
  }
  for (double t : t_values) {
    if (!(t > 0.0)) {
      out.push_back("parameters.t_values: every value must be positive");
      break;
    }
  }
  if (p_max < 2 || p_max % 2 != 0) out.push_back("parameters.p_max: must be an even integer >= 2");
  if (body != "cube" && body != "ball" && body != "simplex") {
    out.push_back("parameters.body: expected cube, ball or simplex");
  }
  positive("parameters.c_reference", c_reference);
  positive("parameters.c_universal", c_universal);
  positive("parameters.b", b);
  if (psi_sq < 0.0) out.push_back("parameters.psi_sq: must be nonnegative");
  for (double s : spectrum) {
    if (!(s > 0.0)) {
      out.push_back("parameters.spectrum: entries must be positive");
      break;
    }
  }
  for (int c : criteria) {
    if (c < 1 || c > 11) {
      out.push_back("experiment.criteria: criteria are numbered 1 to 11");
      break;
    }
  }
  return out;
}

void ExperimentConfig::validate() const {
  const auto p = problems();
  if (!p.empty()) fail(p);
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& f : fields()) j[f.section][f.key] = member_json(*this, f);
  for (const auto& [name, entry] : tolerances.table()) j["tolerances"][name] = entry.value;
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error("cli", "configuration must be a JSON object");
  ExperimentConfig c;
  std::vector<std::string> problems;
  for (const auto& [section, body] : j.items()) {
    if (!body.is_object()) {
      problems.push_back(section + ": expected a section object");
      continue;
    }
    for (const auto& [key, value] : body.items()) {
      if (section == "tolerances") {
        if (!c.tolerances.known(key)) problems.push_back("tolerances." + key + ": unknown key");
        else if (!value.is_number()) problems.push_back("tolerances." + key + ": expected a number");
        else c.tolerances.set(key, value.get<double>());
        continue;
      }
      const Field* f = find_field(section, key);
      if (!f) {
        problems.push_back(section + "." + key + ": unknown key");
        continue;
      }
      const std::string p = assign(c, *f, value);
      if (!p.empty()) problems.push_back(p);
    }
  }
  if (!problems.empty()) fail(problems);
  return c;
}

ExperimentConfig ExperimentConfig::from_ini(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error("cli", std::string("malformed configuration: ") + e.what());
  }
  nlohmann::json j = nlohmann::json::object();
  std::vector<std::string> problems;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      problems.push_back(section + ": keys must belong to a [section]");
      continue;
    }
    for (const auto& [key, node] : body) {
      const std::string value = node.get_value<std::string>();
      if (section == "tolerances") {
        try {
          j[section][key] = std::stod(trim(value));
        } catch (const std::exception&) {
          problems.push_back("tolerances." + key + ": expected a number");
        }
        continue;
      }
      const Field* f = find_field(section, key);
      if (!f) {
        problems.push_back(section + "." + key + ": unknown key");
        continue;
      }
      try {
        j[section][key] = text_to_json(f->member, value);
      } catch (const std::exception&) {
        problems.push_back(section + "." + key + ": cannot parse '" + trim(value) + "'");
      }
    }
  }
  if (!problems.empty()) fail(problems);
  return from_json(j);
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cli", "cannot read configuration file " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  if (file.extension() == ".json") {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(ss.str());
    } catch (const nlohmann::json::parse_error& e) {
      throw Error("cli", std::string("malformed JSON configuration: ") + e.what());
    }
    return from_json(j);
  }
  return from_ini(ss.str());
}

std::string ExperimentConfig::artifact_stem() const {
  std::string stem = experiment;
  std::replace(stem.begin(), stem.end(), '.', '-');
  return stem + "-" + std::to_string(seed);
}

}  // namespace locball::experiments
