#ifndef CWFIELD_CONFIG_HPP
#define CWFIELD_CONFIG_HPP

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cwfield/csv.hpp"
#include "cwfield/diophantine.hpp"
#include "cwfield/dynsys.hpp"
#include "cwfield/field_distribution.hpp"

namespace cwfield {

class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Experiment description. Text form is one `key = value` per line, lists
/// comma separated, `#` starts a comment, and `tol.<name>` lines fill the
/// tolerance table. `schema_version` must be present and equal to 1.
///
///   schema_version = 1
///   alpha = golden            # golden | sqrt2 | <decimal>, one per torus axis
///   x = 0
///   field = identity          # identity | half | two-point:<l> | table:<path>
///   beta = 1, 1.5
///   J = 1
///   n = 1000, 4000            # strictly increasing
///   seeds = 1
///   out = out
///   tol.ks = 0.05
struct ExperimentConfig {
  static constexpr int kSchemaVersion = 1;

  int schema_version = kSchemaVersion;
  std::vector<std::string> alpha{"golden"};
  std::vector<double> x{0.0};
  std::string field = "identity";
  std::vector<double> beta{1.0};
  double J = 1.0;
  std::vector<std::size_t> n{1000};
  std::vector<std::uint64_t> seeds{1};
  std::string out = "out";
  std::map<std::string, double> tol;

  bool operator==(const ExperimentConfig&) const = default;

  double tolerance(const std::string& name, double fallback) const {
    const auto it = tol.find(name);
    return it == tol.end() ? fallback : it->second;
  }

  void validate() const {
    if (schema_version != kSchemaVersion)
      throw ConfigError("schema_version must be " + std::to_string(kSchemaVersion));
    if (alpha.empty()) throw ConfigError("alpha list is empty");
    for (const auto& a : alpha) parse_angle(a);
    if (x.size() != alpha.size()) throw ConfigError("x must have one coordinate per alpha entry");
    if (beta.empty()) throw ConfigError("beta grid is empty");
    for (double b : beta)
      if (!(b >= 0.0)) throw ConfigError("beta values must be >= 0");
    if (!(J > 0.0)) throw ConfigError("J must be > 0");
    if (n.empty()) throw ConfigError("n ladder is empty");
    for (std::size_t i = 0; i < n.size(); ++i) {
      if (n[i] == 0) throw ConfigError("n values must be >= 1");
      if (i > 0 && n[i] <= n[i - 1]) throw ConfigError("n ladder must be strictly increasing");
    }
    if (seeds.empty()) throw ConfigError("seed list is empty");
    if (field.empty()) throw ConfigError("field is empty");
  }

  std::string to_text() const {
    std::ostringstream os;
    os << "schema_version = " << schema_version << "\n";
    os << "alpha = " << join(alpha, [](const std::string& s) { return s; }) << "\n";
    os << "x = " << join(x, [](double v) { return fmt17(v); }) << "\n";
    os << "field = " << field << "\n";
    os << "beta = " << join(beta, [](double v) { return fmt17(v); }) << "\n";
    os << "J = " << fmt17(J) << "\n";
    os << "n = " << join(n, [](std::size_t v) { return std::to_string(v); }) << "\n";
    os << "seeds = " << join(seeds, [](std::uint64_t v) { return std::to_string(v); }) << "\n";
    os << "out = " << out << "\n";
    for (const auto& [k, v] : tol) os << "tol." << k << " = " << fmt17(v) << "\n";
    return os.str();
  }

  static ExperimentConfig from_text(const std::string& text) {
    ExperimentConfig c;
    c.schema_version = 0;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
      const std::string key = trim(line.substr(0, eq));
      const std::string val = trim(line.substr(eq + 1));
      try {
        c.set(key, val);
      } catch (const ConfigError& e) {
        throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
      }
    }
    c.validate();
    return c;
  }

  static ExperimentConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str());
  }

  /// Assigns one key from its text value (also used for flag overrides).
  void set(const std::string& key, const std::string& val) {
    try {
      if (key == "schema_version") schema_version = std::stoi(val);
      else if (key == "alpha") alpha = split(val);
      else if (key == "x") x = to_doubles(split(val));
      else if (key == "field") field = val;
      else if (key == "beta") beta = to_doubles(split(val));
      else if (key == "J") J = std::stod(val);
      else if (key == "n") {
        n.clear();
        for (const auto& s : split(val)) n.push_back(static_cast<std::size_t>(std::stoull(s)));
      } else if (key == "seeds") {
        seeds.clear();
        for (const auto& s : split(val)) seeds.push_back(std::stoull(s));
      } else if (key == "out") out = val;
      else if (key.rfind("tol.", 0) == 0 && key.size() > 4) tol[key.substr(4)] = std::stod(val);
      else throw ConfigError("unknown key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw ConfigError("malformed value for '" + key + "': " + val);
    } catch (const std::out_of_range&) {
      throw ConfigError("value out of range for '" + key + "': " + val);
    }
  }

  /// golden | sqrt2 | decimal in (0, 1)
  static double parse_angle(const std::string& a) {
    if (a == "golden") return TorusRotation::golden_angle();
    if (a == "sqrt2") return TorusRotation::sqrt2_angle();
    double v = 0.0;
    try {
      v = std::stod(a);
    } catch (const std::exception&) {
      throw ConfigError("alpha must be golden, sqrt2 or a decimal (got '" + a + "')");
    }
    if (!(v > 0.0 && v < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    return v;
  }

  /// Exact form of an angle for continued fractions.
  static ExactReal exact_angle(const std::string& a) {
    if (a == "golden") return QuadraticIrrational::golden_fraction();
    if (a == "sqrt2") return QuadraticIrrational::sqrt2_minus_one();
    return Rational::from_double(parse_angle(a));
  }

  TorusRotation rotation() const {
    std::vector<double> angles;
    for (const auto& a : alpha) angles.push_back(parse_angle(a));
    return TorusRotation(std::move(angles));
  }

  FieldFunction field_function() const {
    if (field == "identity") return FieldFunction::identity();
    if (field == "half") return FieldFunction::constant(0.5);
    if (field.rfind("two-point:", 0) == 0) {
      try {
        return FieldFunction::two_point(std::stod(field.substr(10)));
      } catch (const std::invalid_argument&) {
        throw ConfigError("malformed two-point level: " + field);
      }
    }
    if (field.rfind("table:", 0) == 0) return load_table(field.substr(6));
    throw ConfigError("field must be identity, half, two-point:<l> or table:<path> (got '" + field + "')");
  }

  FieldDistribution distribution() const { return FieldDistribution::pushforward(field_function()); }

private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  static std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string item;
    while (std::getline(is, item, ',')) {
      item = trim(item);
      if (!item.empty()) out.push_back(item);
    }
    return out;
  }

  static std::vector<double> to_doubles(const std::vector<std::string>& v) {
    std::vector<double> out;
    for (const auto& s : v) out.push_back(std::stod(s));
    return out;
  }

  template <class V, class F>
  static std::string join(const std::vector<V>& v, F f) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + f(v[i]);
    return out;
  }

  // One value per whitespace/comma separated token; declared variation is
  // the total variation of the piecewise-linear interpolant.
  static FieldFunction load_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read field table " + path);
    std::vector<double> values;
    std::string tok;
    while (in >> tok) {
      for (const auto& s : split(tok)) {
        try {
          values.push_back(std::stod(s));
        } catch (const std::exception&) {
          throw ConfigError("field table " + path + ": bad value '" + s + "'");
        }
      }
    }
    double var = 0.0;
    for (std::size_t i = 1; i < values.size(); ++i) var += std::abs(values[i] - values[i - 1]);
    try {
      return FieldFunction::table(std::move(values), var);
    } catch (const DomainError& e) {
      throw ConfigError(std::string("field table ") + path + ": " + e.what());
    }
  }
};

}  // namespace cwfield

#endif  // CWFIELD_CONFIG_HPP
