// Licensed under the Apache License, Version 2.0 (the "License"); you
// may not use this file except in compliance with the License.  You
// may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or
// implied.  See the License for the specific language governing
// permissions and limitations under the License.

#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fhvc/corpus/synthetic.hpp"
#include "fhvc/model/train.hpp"

namespace fhvc::cli {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ConfigKey {
  const char* name;
  const char* default_value;
  const char* help;
};

// Every accepted key with its default.
std::span<const ConfigKey> config_keys();

/// `key = value` settings over the defaults of config_keys().
class CliConfig {
 public:
  CliConfig();

  // Lines are `key = value`; '#' starts a comment. Unknown keys throw.
  void merge_text(const std::string& text, const std::string& origin = "<text>");
  void merge_file(const std::filesystem::path& path);
  // "key=value"
  void apply_override(const std::string& assignment);
  void set(const std::string& key, const std::string& value);

  const std::string& get(const std::string& key) const;
  std::size_t get_size(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<std::size_t> get_size_list(const std::string& key) const;

  model::TrainConfig train_config(std::size_t feature_dim) const;
  corpus::SyntheticSpec synthetic_spec() const;

  // All settings as `key = value` lines in key order.
  std::string dump() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace fhvc::cli
