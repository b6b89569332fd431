#include "mckf/config.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace mckf {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

class KeyValues {
 public:
  explicit KeyValues(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw std::runtime_error("config line " + std::to_string(lineno) +
                                 ": expected key = value");
      }
      const std::string key = trim(line.substr(0, eq));
      const std::string val = trim(line.substr(eq + 1));
      if (key.empty() || !kv_.emplace(key, val).second) {
        throw std::runtime_error("config line " + std::to_string(lineno) +
                                 ": empty or duplicate key");
      }
    }
  }

  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  const std::string& raw(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) {
      throw std::runtime_error("config: missing key '" + key + "'");
    }
    return it->second;
  }

  Vector numbers(const std::string& key) const {
    std::istringstream in(raw(key));
    Vector v;
    double x;
    while (in >> x) v.push_back(x);
    if (!in.eof()) {
      throw std::runtime_error("config: non-numeric data in '" + key + "'");
    }
    return v;
  }

  double number(const std::string& key) const {
    const Vector v = numbers(key);
    if (v.size() != 1) {
      throw std::runtime_error("config: '" + key + "' must be a single number");
    }
    return v[0];
  }

  Matrix matrix(const std::string& key, std::size_t rows,
                std::size_t cols) const {
    const Vector v = numbers(key);
    if (v.size() != rows * cols) {
      throw std::runtime_error("config: '" + key + "' needs " +
                               std::to_string(rows * cols) + " entries, got " +
                               std::to_string(v.size()));
    }
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) m(i, j) = v[i * cols + j];
    return m;
  }

 private:
  std::map<std::string, std::string> kv_;
};

NoiseSpec parse_noise(const KeyValues& kv, const std::string& prefix,
                      std::size_t dim) {
  const std::string kind = kv.raw(prefix + ".kind");
  if (kind == "gaussian") {
    return NoiseSpec::gaussian(kv.numbers(prefix + ".mean"),
                               kv.matrix(prefix + ".cov", dim, dim));
  }
  if (kind == "gaussian_shot") {
    return NoiseSpec::gaussian_plus_shot(
        kv.numbers(prefix + ".mean"), kv.matrix(prefix + ".cov", dim, dim),
        kv.number(prefix + ".shot_prob"), kv.number(prefix + ".shot_scale"));
  }
  if (kind == "mixture") {
    return NoiseSpec::mixture(
        kv.numbers(prefix + ".mean"), kv.matrix(prefix + ".cov", dim, dim),
        kv.numbers(prefix + ".mean2"), kv.matrix(prefix + ".cov2", dim, dim),
        kv.number(prefix + ".weight1"));
  }
  throw std::runtime_error("config: unknown noise kind '" + kind + "' for " +
                           prefix);
}

}  // namespace

CustomExperiment parse_experiment_config(const std::string& text) {
  const KeyValues kv(text);
  const auto n = static_cast<std::size_t>(kv.number("n"));
  const auto m = static_cast<std::size_t>(kv.number("m"));
  const std::size_t q =
      kv.has("q") ? static_cast<std::size_t>(kv.number("q")) : n;

  CustomExperiment e;
  e.model.F = kv.matrix("F", n, n);
  e.model.G = kv.has("G") ? kv.matrix("G", n, q) : Matrix::identity(n);
  e.model.H = kv.matrix("H", m, n);
  e.model.Q = kv.matrix("Q", q, q);
  e.model.R = kv.matrix("R", m, m);
  e.model.x0_mean = kv.numbers("x0");
  e.model.P0 = kv.matrix("P0", n, n);
  if (kv.has("drift")) {
    Vector d = kv.numbers("drift");
    if (d.size() != n) throw std::runtime_error("config: drift needs n entries");
    e.model.input = {std::move(d)};
  }
  e.model.validate();
  e.process = parse_noise(kv, "process", q);
  e.measurement = parse_noise(kv, "meas", m);
  if (e.process.mean.size() != q || e.measurement.mean.size() != m) {
    throw std::runtime_error("config: noise mean dimension mismatch");
  }
  return e;
}

CustomExperiment load_experiment_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("config: cannot open " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_experiment_config(buf.str());
}

}  // namespace mckf
