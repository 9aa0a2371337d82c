#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace afflat::cli {

struct ParamSpec {
  std::string name;
  std::optional<std::string> def;  ///< nullopt: required
  std::string help;
};

/// Fully resolved parameters of one run. Every value, defaults included, is
/// kept as text so that it can be embedded and replayed verbatim.
class Resolved {
 public:
  Resolved(std::string command, std::map<std::string, std::string> values)
      : command_(std::move(command)), values_(std::move(values)) {}

  const std::string& command() const { return command_; }
  const std::map<std::string, std::string>& values() const { return values_; }

  const std::string& raw(const std::string& key) const;
  bool is(const std::string& key, const std::string& text) const { return raw(key) == text; }
  double real(const std::string& key) const;
  long long integer(const std::string& key) const;
  std::uint64_t seed() const;
  bool flag(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;
  std::vector<std::string> list(const std::string& key) const;

 private:
  std::string command_;
  std::map<std::string, std::string> values_;
};

/// Precedence: flags, then the config file, then SEED from the environment,
/// then defaults. Unknown keys in the file are rejected.
Resolved resolve(const std::string& command, const std::vector<ParamSpec>& specs,
                 const std::map<std::string, std::string>& flags, const std::optional<std::string>& config_path);

/// Thread count: flag, then THREADS, then available parallelism.
unsigned resolve_threads(const std::optional<std::string>& flag);

std::vector<std::string> split_top_level(const std::string& text, char sep);

}  // namespace afflat::cli
