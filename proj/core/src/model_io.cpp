#include "crdp/model_io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <utility>

namespace crdp {

ParseError::ParseError(std::string file, int line, const std::string& what)
    : std::runtime_error(file + ":" + std::to_string(line) + ": " + what),
      file_(std::move(file)),
      line_(line) {}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool valid_name(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
  return true;
}

ConfigValue parse_value(std::string_view raw, const std::string& file, int line);

ConfigValue parse_array(std::string_view inner, const std::string& file, int line) {
  ConfigValue v;
  v.kind = ConfigValue::Kind::array;
  v.line = line;
  std::size_t start = 0;
  int depth = 0;
  bool in_string = false, escaped = false;
  for (std::size_t i = 0; i <= inner.size(); ++i) {
    const bool at_end = i == inner.size();
    const char c = at_end ? ',' : inner[i];
    if (in_string) {
      if (escaped)
        escaped = false;
      else if (c == '\\')
        escaped = true;
      else if (c == '"')
        in_string = false;
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '[') {
      ++depth;
    } else if (c == ']') {
      --depth;
    } else if (c == ',' && depth == 0) {
      const std::string_view piece = trim(inner.substr(start, i - start));
      start = i + 1;
      if (piece.empty()) {
        if (at_end) break;  // trailing comma
        throw ParseError(file, line, "empty array element");
      }
      v.items.push_back(parse_value(piece, file, line));
    }
  }
  return v;
}

ConfigValue parse_value(std::string_view raw, const std::string& file, int line) {
  const std::string_view s = trim(raw);
  if (s.empty()) throw ParseError(file, line, "missing value");
  ConfigValue v;
  v.line = line;
  if (s.front() == '"') {
    v.kind = ConfigValue::Kind::string;
    bool escaped = false;
    std::size_t i = 1;
    for (; i < s.size(); ++i) {
      const char c = s[i];
      if (escaped) {
        if (c != '"' && c != '\\')
          throw ParseError(file, line, "unsupported escape in string");
        v.str.push_back(c);
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        break;
      } else {
        v.str.push_back(c);
      }
    }
    if (i >= s.size()) throw ParseError(file, line, "unterminated string");
    if (!trim(s.substr(i + 1)).empty())
      throw ParseError(file, line, "trailing characters after string");
    return v;
  }
  if (s.front() == '[') {
    if (s.back() != ']') throw ParseError(file, line, "unterminated array");
    return parse_array(s.substr(1, s.size() - 2), file, line);
  }
  if (s == "true" || s == "false") {
    v.kind = ConfigValue::Kind::boolean;
    v.flag = s == "true";
    return v;
  }
  v.kind = ConfigValue::Kind::number;
  std::string_view num = s;
  if (!num.empty() && num.front() == '+') num.remove_prefix(1);
  const auto res = std::from_chars(num.data(), num.data() + num.size(), v.num);
  if (res.ec != std::errc{} || res.ptr != num.data() + num.size())
    throw ParseError(file, line, "cannot parse value '" + std::string(s) + "'");
  return v;
}

}  // namespace

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  const auto sec = sections.find(section);
  return sec != sections.end() && sec->second.count(key) > 0;
}

const ConfigValue& ConfigFile::get(const std::string& section, const std::string& key) const {
  const auto sec = sections.find(section);
  if (sec == sections.end())
    throw ParseError(file, 0, "missing section [" + section + "]");
  const auto it = sec->second.find(key);
  if (it == sec->second.end())
    throw ParseError(file, 0, "missing key '" + key + "' in [" + section + "]");
  return it->second;
}

ConfigFile parse_config_text(std::string_view text, std::string file_label) {
  ConfigFile out;
  out.file = std::move(file_label);
  std::string pending;
  int pending_line = 0;
  int depth = 0;
  bool in_string = false, escaped = false;
  std::string current_section;
  bool have_section = false;

  auto flush = [&]() {
    const std::string_view logical = trim(pending);
    if (logical.empty()) {
      pending.clear();
      return;
    }
    if (logical.front() == '[' && logical.find('=') == std::string_view::npos) {
      if (logical.back() != ']')
        throw ParseError(out.file, pending_line, "malformed section header");
      const std::string_view name = trim(logical.substr(1, logical.size() - 2));
      if (!valid_name(name))
        throw ParseError(out.file, pending_line, "bad section name");
      if (out.sections.count(std::string(name)))
        throw ParseError(out.file, pending_line,
                         "duplicate section [" + std::string(name) + "]");
      current_section = std::string(name);
      have_section = true;
      out.sections[current_section];
    } else {
      const std::size_t eq = logical.find('=');
      if (eq == std::string_view::npos)
        throw ParseError(out.file, pending_line, "expected key = value");
      const std::string_view key = trim(logical.substr(0, eq));
      if (!valid_name(key)) throw ParseError(out.file, pending_line, "bad key name");
      if (!have_section)
        throw ParseError(out.file, pending_line, "key outside any section");
      auto& sec = out.sections[current_section];
      if (sec.count(std::string(key)))
        throw ParseError(out.file, pending_line,
                         "duplicate key '" + std::string(key) + "'");
      sec.emplace(std::string(key),
                  parse_value(logical.substr(eq + 1), out.file, pending_line));
    }
    pending.clear();
  };

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view raw =
        text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    ++line_no;
    if (trim(pending).empty()) pending_line = line_no;
    bool commented = false;
    for (char c : raw) {
      if (in_string) {
        pending.push_back(c);
        if (escaped)
          escaped = false;
        else if (c == '\\')
          escaped = true;
        else if (c == '"')
          in_string = false;
        continue;
      }
      if (c == '#') {
        commented = true;
        break;
      }
      pending.push_back(c);
      if (c == '"')
        in_string = true;
      else if (c == '[')
        ++depth;
      else if (c == ']')
        --depth;
    }
    (void)commented;
    if (in_string) throw ParseError(out.file, line_no, "unterminated string");
    if (depth < 0) throw ParseError(out.file, line_no, "unbalanced ']'");
    if (depth == 0)
      flush();
    else
      pending.push_back(' ');
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  if (depth != 0) throw ParseError(out.file, line_no, "unterminated array");
  return out;
}

ConfigFile parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, 0, "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

namespace {

long long need_int(const ConfigFile& c, const std::string& sec, const std::string& key,
                   long long lo, long long hi) {
  const ConfigValue& v = c.get(sec, key);
  if (v.kind != ConfigValue::Kind::number || !std::isfinite(v.num) ||
      v.num != std::floor(v.num))
    throw ParseError(c.file, v.line, "'" + key + "' must be an integer");
  const long long n = static_cast<long long>(v.num);
  if (n < lo || n > hi)
    throw ParseError(c.file, v.line,
                     "'" + key + "' must be between " + std::to_string(lo) + " and " +
                         std::to_string(hi));
  return n;
}

std::vector<double> number_array(const ConfigFile& c, const ConfigValue& v,
                                 const std::string& key) {
  if (v.kind != ConfigValue::Kind::array)
    throw ParseError(c.file, v.line, "'" + key + "' must be an array");
  std::vector<double> out;
  out.reserve(v.items.size());
  for (const ConfigValue& item : v.items) {
    if (item.kind != ConfigValue::Kind::number || !std::isfinite(item.num))
      throw ParseError(c.file, item.line, "'" + key + "' must contain finite numbers");
    out.push_back(item.num);
  }
  return out;
}

}  // namespace

MarkovSource load_markov_source(const ConfigFile& config) {
  const std::string sec = "source";
  const int n = static_cast<int>(need_int(config, sec, "alphabet_size", 1, 1024));

  Alphabet alphabet(n);
  if (config.has(sec, "labels")) {
    const ConfigValue& lv = config.get(sec, "labels");
    if (lv.kind != ConfigValue::Kind::array ||
        static_cast<int>(lv.items.size()) != n)
      throw ParseError(config.file, lv.line, "'labels' must list one name per symbol");
    std::vector<std::string> names;
    for (const ConfigValue& item : lv.items) {
      if (item.kind != ConfigValue::Kind::string)
        throw ParseError(config.file, item.line, "'labels' must contain strings");
      names.push_back(item.str);
    }
    alphabet = Alphabet(n, std::move(names));
  }

  const ConfigValue& tv = config.get(sec, "transition");
  const std::vector<double> flat = number_array(config, tv, "transition");
  if (static_cast<int>(flat.size()) != n * n)
    throw ParseError(config.file, tv.line,
                     "'transition' must have alphabet_size^2 entries (row-major)");
  StochasticKernel transition(n, n);
  try {
    std::vector<double> row(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      std::copy(flat.begin() + static_cast<std::ptrdiff_t>(i) * n,
                flat.begin() + static_cast<std::ptrdiff_t>(i + 1) * n, row.begin());
      transition.set_row(i, row);
    }
  } catch (const std::invalid_argument& e) {
    throw ParseError(config.file, tv.line, e.what());
  }

  Distribution initial;
  bool want_stationary = true;
  if (config.has(sec, "initial")) {
    const ConfigValue& iv = config.get(sec, "initial");
    if (iv.kind == ConfigValue::Kind::string) {
      if (iv.str != "stationary")
        throw ParseError(config.file, iv.line,
                         "'initial' must be \"stationary\" or a distribution");
    } else {
      const std::vector<double> p = number_array(config, iv, "initial");
      if (static_cast<int>(p.size()) != n)
        throw ParseError(config.file, iv.line,
                         "'initial' must have one probability per symbol");
      try {
        initial = Distribution(p);
      } catch (const std::invalid_argument& e) {
        throw ParseError(config.file, iv.line, e.what());
      }
      want_stationary = false;
    }
  }
  if (want_stationary) initial = Distribution::uniform(n);  // placeholder
  MarkovSource source(std::move(alphabet), std::move(initial), std::move(transition));
  if (want_stationary) {
    try {
      source.initial = stationary_distribution(source);
    } catch (const std::exception& e) {
      throw ParseError(config.file, tv.line, e.what());
    }
  }
  return source;
}

DistortionSpec load_distortion_spec(const ConfigFile& config, int x_size) {
  const std::string sec = "distortion";
  const int xw = static_cast<int>(need_int(config, sec, "x_window", 0, 8));
  const int yw = static_cast<int>(need_int(config, sec, "y_window", 0, 8));
  int y_size = x_size;
  if (config.has(sec, "y_alphabet_size"))
    y_size = static_cast<int>(need_int(config, sec, "y_alphabet_size", 1, 1024));

  const ConfigValue& tv = config.get(sec, "table");
  const std::vector<double> table = number_array(config, tv, "table");
  const long long expect = ipow(x_size, xw + 1) * ipow(y_size, yw + 1);
  if (static_cast<long long>(table.size()) != expect)
    throw ParseError(config.file, tv.line,
                     "'table' must have " + std::to_string(expect) +
                         " entries (source window major, reconstruction window minor)");
  try {
    return DistortionSpec(x_size, y_size, xw, yw, table);
  } catch (const std::invalid_argument& e) {
    throw ParseError(config.file, tv.line, e.what());
  }
}

ModelFile load_model(const std::string& path) {
  const ConfigFile config = parse_config(path);
  MarkovSource source = load_markov_source(config);
  DistortionSpec dist = load_distortion_spec(config, source.alphabet.size);
  return ModelFile{std::move(source), std::move(dist)};
}

std::string format_sig(double v) {
  char buf[64];
  const auto res =
      std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

void write_curve_csv(std::ostream& os, const std::vector<RdPoint>& points) {
  os << "s,D,R,iterations,converged\n";
  for (const RdPoint& p : points)
    os << format_sig(p.s) << ',' << format_sig(p.distortion) << ','
       << format_sig(p.rate) << ',' << p.iterations << ',' << (p.converged ? 1 : 0)
       << '\n';
}

void write_trace_csv(std::ostream& os, const Trace& trace) {
  os << "t,x,a,b,y,rho\n";
  for (std::size_t t = 0; t < trace.rho.size(); ++t)
    os << t << ',' << trace.x[t] << ',' << trace.a[t] << ',' << trace.b[t] << ','
       << trace.y[t] << ',' << format_sig(trace.rho[t]) << '\n';
}

void write_stats(std::ostream& os, const EmpiricalStats& stats, std::string_view rng_name,
                 std::uint64_t seed) {
  os << "n=" << stats.n << '\n';
  os << "mean_distortion=" << format_sig(stats.mean_distortion) << '\n';
  os << "std_err=" << format_sig(stats.std_err) << '\n';
  os << "marginal_y=";
  for (std::size_t i = 0; i < stats.marginal_y.size(); ++i) {
    if (i) os << ',';
    os << format_sig(stats.marginal_y[i]);
  }
  os << '\n';
  os << "rng=" << rng_name << '\n';
  os << "seed=" << seed << '\n';
}

}  // namespace crdp
