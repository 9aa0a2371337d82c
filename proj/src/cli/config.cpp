#include "config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "afflat/cli.hpp"
#include "afflat/errors.hpp"
#include "afflat/rng.hpp"

namespace afflat::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string normalize_key(std::string k) {
  k = trim(k);
  while (!k.empty() && k.front() == '-') k.erase(k.begin());
  return k;
}

}  // namespace

std::vector<std::string> split_top_level(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  int depth = 0;
  for (char ch : text) {
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    if (ch == sep && depth == 0) {
      parts.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  parts.push_back(trim(cur));
  return parts;
}

std::map<std::string, std::string> load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("config: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  std::map<std::string, std::string> out;

  if (trim(text).rfind('{', 0) == 0) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw UsageError("config: invalid JSON in '" + path + "': " + e.what());
    }
    const auto& obj = j.contains("config") ? j.at("config") : j;
    if (!obj.is_object()) throw UsageError("config: expected a JSON object in '" + path + "'");
    for (const auto& [k, v] : obj.items()) out[normalize_key(k)] = v.is_string() ? v.get<std::string>() : v.dump();
    if (j.contains("command") && j.at("command").is_string()) out["command"] = j.at("command").get<std::string>();
    return out;
  }

  std::istringstream lines(text);
  std::string line;
  int lineno = 0;
  const bool csv = text.find("#!") != std::string::npos;
  while (std::getline(lines, line)) {
    ++lineno;
    std::string body = trim(line);
    if (body.rfind("#!", 0) == 0) {
      body = trim(body.substr(2));
    } else if (body.empty() || body[0] == '#') {
      continue;
    } else if (csv) {
      continue;  // data rows of a CSV output
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw UsageError("config: line " + std::to_string(lineno) + " of '" + path + "' is not 'key = value'");
    }
    out[normalize_key(body.substr(0, eq))] = trim(body.substr(eq + 1));
  }
  return out;
}

const std::string& Resolved::raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw InternalError("config: unknown key '" + key + "'");
  return it->second;
}

double Resolved::real(const std::string& key) const {
  try {
    return parse_scalar(raw(key)).value;
  } catch (const UsageError& e) {
    throw UsageError("--" + key + ": " + e.what());
  }
}

long long Resolved::integer(const std::string& key) const {
  const std::string& s = raw(key);
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec == std::errc() && res.ptr == s.data() + s.size()) return v;
  // Allow forms such as 1e5.
  const double x = real(key);
  if (!(std::abs(x) < 9e18) || x != std::floor(x)) throw UsageError("--" + key + ": expected an integer, got '" + s + "'");
  return static_cast<long long>(x);
}

std::uint64_t Resolved::seed() const {
  const std::string& s = raw("seed");
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw UsageError("--seed: expected a non-negative 64-bit integer, got '" + s + "'");
  return v;
}

bool Resolved::flag(const std::string& key) const {
  const std::string& s = raw(key);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw UsageError("--" + key + ": expected true or false, got '" + s + "'");
}

std::vector<double> Resolved::reals(const std::string& key) const {
  std::vector<double> out;
  for (const auto& part : list(key)) {
    try {
      out.push_back(parse_scalar(part).value);
    } catch (const UsageError& e) {
      throw UsageError("--" + key + ": " + e.what());
    }
  }
  return out;
}

std::vector<std::string> Resolved::list(const std::string& key) const {
  auto parts = split_top_level(raw(key), ',');
  for (const auto& p : parts)
    if (p.empty()) throw UsageError("--" + key + ": empty list entry in '" + raw(key) + "'");
  return parts;
}

Resolved resolve(const std::string& command, const std::vector<ParamSpec>& specs,
                 const std::map<std::string, std::string>& flags, const std::optional<std::string>& config_path) {
  std::map<std::string, std::string> file;
  if (config_path) {
    file = load_config_file(*config_path);
    const auto it = file.find("command");
    if (it != file.end()) {
      if (it->second != command)
        throw UsageError("config: file was written by '" + it->second + "', not '" + command + "'");
      file.erase(it);
    }
    for (const auto& [k, v] : file) {
      const bool known = std::any_of(specs.begin(), specs.end(), [&](const ParamSpec& p) { return p.name == k; });
      if (!known) throw UsageError("config: unknown key '" + k + "' for " + command);
    }
  }
  std::map<std::string, std::string> values;
  for (const auto& p : specs) {
    if (auto f = flags.find(p.name); f != flags.end()) {
      values[p.name] = f->second;
    } else if (auto c = file.find(p.name); c != file.end()) {
      values[p.name] = c->second;
    } else if (const char* env = p.name == "seed" ? std::getenv("SEED") : nullptr; env && *env) {
      values[p.name] = env;
    } else if (p.def) {
      values[p.name] = *p.def;
    } else {
      throw UsageError(command + ": missing required option --" + p.name);
    }
  }
  return Resolved(command, std::move(values));
}

unsigned resolve_threads(const std::optional<std::string>& flag) {
  std::string s;
  if (flag) {
    s = *flag;
  } else if (const char* env = std::getenv("THREADS"); env && *env) {
    s = env;
  } else {
    return default_thread_count();
  }
  unsigned v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || v == 0)
    throw UsageError("threads: expected a positive integer, got '" + s + "'");
  return v;
}

}  // namespace afflat::cli
