#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "crdp/distortion.hpp"
#include "crdp/prob.hpp"
#include "crdp/realization.hpp"
#include "crdp/solver.hpp"

namespace crdp {

// Raised for malformed input files; carries file name and 1-based line.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string file, int line, const std::string& what);
  const std::string& file() const { return file_; }
  int line() const { return line_; }

 private:
  std::string file_;
  int line_;
};

// Minimal TOML-style config: [section] headers, key = value pairs,
// # comments, values are strings, booleans, numbers, or flat arrays
// (which may span lines).  Enough for the model files; nothing more.
struct ConfigValue {
  enum class Kind { string, boolean, number, array };
  Kind kind = Kind::number;
  std::string str;
  bool flag = false;
  double num = 0.0;
  std::vector<ConfigValue> items;
  int line = 0;
};

struct ConfigFile {
  std::string file;
  std::map<std::string, std::map<std::string, ConfigValue>> sections;

  bool has(const std::string& section, const std::string& key) const;
  const ConfigValue& get(const std::string& section, const std::string& key) const;
};

ConfigFile parse_config_text(std::string_view text, std::string file_label);
ConfigFile parse_config(const std::string& path);

// [source]: alphabet_size, transition (row-major), initial = "stationary" or
// an explicit distribution (default stationary), optional labels.
MarkovSource load_markov_source(const ConfigFile& config);

// [distortion]: x_window, y_window, flat table over (source window,
// reconstruction window) pairs, optional y_alphabet_size (default x_size).
DistortionSpec load_distortion_spec(const ConfigFile& config, int x_size);

struct ModelFile {
  MarkovSource source;
  DistortionSpec distortion;
};

ModelFile load_model(const std::string& path);

// 12 significant digits, locale-independent.
std::string format_sig(double v);

void write_curve_csv(std::ostream& os, const std::vector<RdPoint>& points);
void write_trace_csv(std::ostream& os, const Trace& trace);
void write_stats(std::ostream& os, const EmpiricalStats& stats, std::string_view rng_name,
                 std::uint64_t seed);

}  // namespace crdp
