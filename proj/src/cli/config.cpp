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


#include "fhvc/cli/config.hpp"

#include <fstream>
#include <sstream>

namespace fhvc::cli {

namespace {

constexpr ConfigKey kKeys[] = {
    {"seed", "0", "training seed"},
    {"batch_size", "256", "segments per minibatch"},
    {"epochs", "500", "training epochs"},
    {"learning_rate", "1e-4", "Adam step size"},
    {"beta1", "0.95", "Adam first-moment decay"},
    {"beta2", "0.999", "Adam second-moment decay"},
    {"epsilon", "1e-8", "Adam denominator offset"},
    {"dev_fraction", "0.1", "share of sequences held out for model selection"},
    {"select_interval", "1", "epochs between dev evaluations"},
    {"clip_norm", "5", "global gradient norm limit"},
    {"segment_frames", "20", "frames per segment"},
    {"hop", "20", "frames between segment starts"},
    {"hidden", "256", "LSTM units"},
    {"z1_dim", "32", "segment latent dimension"},
    {"z2_dim", "32", "sequence latent dimension"},
    {"var_z1", "1", "prior variance of Z1"},
    {"var_z2", "0.0625", "prior variance of Z2 around mu"},
    {"var_mu", "1", "prior variance of mu"},
    {"alpha", "10", "discriminative term weight"},
    {"synth.speakers", "8", "synthetic speakers"},
    {"synth.utterances", "10", "synthetic utterances per speaker"},
    {"synth.frames", "120", "frames per synthetic utterance"},
    {"synth.dim", "8", "synthetic feature dimension"},
    {"synth.templates", "6", "content templates"},
    {"synth.offset_scale", "1.5", "speaker offset scale"},
    {"synth.noise_scale", "0.1", "frame noise scale"},
    {"synth.seed", "7", "synthetic corpus seed"},
    {"manifest", "", "corpus manifest (empty: synthetic corpus from synth.*)"},
    {"model", "model.fhvm", "checkpoint path"},
    {"history", "history.csv", "training history CSV"},
    {"out_dir", "data", "gen-data output directory"},
    {"sweep.ns", "1,2,5,10", "embedding utterance counts"},
    {"sweep.repeats", "5", "draws per n"},
    {"sweep.workers", "1", "sweep worker threads"},
    {"sweep.held_out", "4", "extra synthetic utterances per speaker used as test content"},
    {"sweep.align", "false", "score with DTW alignment"},
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::uint64_t parse_u64(const std::string& key, const std::string& s) {
  auto fail = [&] { return ConfigError(key + ": expected a non-negative integer, got '" + s + "'"); };
  if (s.empty() || s[0] == '-') throw fail();
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    throw fail();
  }
  if (pos != s.size()) throw fail();
  return v;
}

}  // namespace

std::span<const ConfigKey> config_keys() { return kKeys; }

CliConfig::CliConfig() {
  for (const auto& k : kKeys) values_[k.name] = k.default_value;
}

void CliConfig::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second = value;
}

void CliConfig::merge_text(const std::string& text, const std::string& origin) {
  std::istringstream is(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(is, line)) {
    ++number;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(number) + ": expected 'key = value'");
    }
    try {
      set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(number) + ": " + e.what());
    }
  }
}

void CliConfig::merge_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  merge_text(ss.str(), path.string());
}

void CliConfig::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + assignment + "'");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

const std::string& CliConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

std::uint64_t CliConfig::get_u64(const std::string& key) const { return parse_u64(key, get(key)); }

std::size_t CliConfig::get_size(const std::string& key) const { return static_cast<std::size_t>(get_u64(key)); }

double CliConfig::get_double(const std::string& key) const {
  const std::string& s = get(key);
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + s + "'");
  }
  if (pos != s.size()) throw ConfigError(key + ": expected a number, got '" + s + "'");
  return v;
}

bool CliConfig::get_bool(const std::string& key) const {
  const std::string& s = get(key);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + s + "'");
}

std::vector<std::size_t> CliConfig::get_size_list(const std::string& key) const {
  std::vector<std::size_t> out;
  std::stringstream ss(get(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw ConfigError(key + ": empty list entry");
    out.push_back(static_cast<std::size_t>(parse_u64(key, item)));
  }
  return out;
}

model::TrainConfig CliConfig::train_config(std::size_t feature_dim) const {
  model::TrainConfig tc;
  tc.seed = get_u64("seed");
  tc.batch_size = get_size("batch_size");
  tc.epochs = get_size("epochs");
  tc.adam.learning_rate = get_double("learning_rate");
  tc.adam.beta1 = get_double("beta1");
  tc.adam.beta2 = get_double("beta2");
  tc.adam.epsilon = get_double("epsilon");
  tc.dev_fraction = get_double("dev_fraction");
  tc.select_interval = get_size("select_interval");
  tc.clip_norm = get_double("clip_norm");
  tc.model.feature_dim = feature_dim;
  tc.model.segment_frames = get_size("segment_frames");
  tc.model.hop = get_size("hop");
  tc.model.hidden = get_size("hidden");
  tc.model.z1_dim = get_size("z1_dim");
  tc.model.z2_dim = get_size("z2_dim");
  tc.model.var_z1 = get_double("var_z1");
  tc.model.var_z2 = get_double("var_z2");
  tc.model.var_mu = get_double("var_mu");
  tc.model.alpha = get_double("alpha");
  try {
    tc.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return tc;
}

corpus::SyntheticSpec CliConfig::synthetic_spec() const {
  corpus::SyntheticSpec s;
  s.speakers = get_size("synth.speakers");
  s.utterances_per_speaker = get_size("synth.utterances");
  s.frames = get_size("synth.frames");
  s.dim = get_size("synth.dim");
  s.templates = get_size("synth.templates");
  s.offset_scale = get_double("synth.offset_scale");
  s.noise_scale = get_double("synth.noise_scale");
  s.seed = get_u64("synth.seed");
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return s;
}

std::string CliConfig::dump() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

}  // namespace fhvc::cli
