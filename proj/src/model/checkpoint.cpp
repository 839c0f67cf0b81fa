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


#include "fhvc/model/checkpoint.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "fhvc/corpus/binary_io.hpp"

namespace fhvc::model {

namespace {

CheckpointError corrupt(const std::string& what) {
  return CheckpointError(CheckpointErrorKind::corrupt, "corrupt checkpoint: " + what);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void put_section(io::ByteWriter& w, const std::string& name, const Tensor& t) {
  w.u32(static_cast<std::uint32_t>(name.size()));
  w.text(name);
  w.u32(static_cast<std::uint32_t>(t.rank()));
  for (std::size_t d : t.shape()) w.u32(static_cast<std::uint32_t>(d));
  for (double v : t.data()) w.f64(v);
}

Tensor column(const std::vector<double>& v) { return Tensor({v.size(), 1}, v); }

Tensor take(std::map<std::string, Tensor>& sections, const std::string& name) {
  auto it = sections.find(name);
  if (it == sections.end()) throw corrupt("missing section " + name);
  Tensor t = std::move(it->second);
  sections.erase(it);
  return t;
}

}  // namespace

std::string config_text(const ModelConfig& c) {
  std::ostringstream os;
  os << "feature_dim=" << c.feature_dim << "\n"
     << "segment_frames=" << c.segment_frames << "\n"
     << "hop=" << c.hop << "\n"
     << "hidden=" << c.hidden << "\n"
     << "z1_dim=" << c.z1_dim << "\n"
     << "z2_dim=" << c.z2_dim << "\n"
     << "var_z1=" << format_double(c.var_z1) << "\n"
     << "var_z2=" << format_double(c.var_z2) << "\n"
     << "var_mu=" << format_double(c.var_mu) << "\n"
     << "alpha=" << format_double(c.alpha) << "\n";
  return os.str();
}

ModelConfig parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw corrupt("config line without '=': " + line);
    if (!kv.emplace(line.substr(0, eq), line.substr(eq + 1)).second) throw corrupt("duplicate config key");
  }
  auto get = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw corrupt(std::string("config missing ") + key);
    return it->second;
  };
  auto size = [&](const char* key) -> std::size_t {
    const std::string& s = get(key);
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(s, &pos);
    } catch (const std::exception&) {
      throw corrupt(std::string("bad value for ") + key);
    }
    if (pos != s.size()) throw corrupt(std::string("bad value for ") + key);
    return static_cast<std::size_t>(v);
  };
  auto real = [&](const char* key) -> double {
    const std::string& s = get(key);
    std::size_t pos = 0;
    double v = 0;
    try {
      v = std::stod(s, &pos);
    } catch (const std::exception&) {
      throw corrupt(std::string("bad value for ") + key);
    }
    if (pos != s.size()) throw corrupt(std::string("bad value for ") + key);
    return v;
  };
  ModelConfig c;
  c.feature_dim = size("feature_dim");
  c.segment_frames = size("segment_frames");
  c.hop = size("hop");
  c.hidden = size("hidden");
  c.z1_dim = size("z1_dim");
  c.z2_dim = size("z2_dim");
  c.var_z1 = real("var_z1");
  c.var_z2 = real("var_z2");
  c.var_mu = real("var_mu");
  c.alpha = real("alpha");
  if (kv.size() != 10) throw corrupt("unknown config keys");
  return c;
}

std::vector<std::uint8_t> encode_model(const FhvaeModel& model) {
  model.validate();
  io::ByteWriter w;
  w.bytes(kCheckpointMagic, 4);
  w.u32(kCheckpointVersion);
  const std::string cfg = config_text(model.config);
  w.u32(static_cast<std::uint32_t>(cfg.size()));
  w.text(cfg);
  std::vector<double> ids(model.train_ids.begin(), model.train_ids.end());
  std::vector<double> segs(model.train_segments.begin(), model.train_segments.end());
  w.u32(static_cast<std::uint32_t>(model.params.size() + 4));
  for (const auto& [name, t] : model.params) put_section(w, name, t);
  put_section(w, "norm.mean", Tensor::row(model.norm.mean));
  put_section(w, "norm.std", Tensor::row(model.norm.stddev));
  put_section(w, "seq.ids", column(ids));
  put_section(w, "seq.segments", column(segs));
  return std::move(w.buffer());
}

FhvaeModel decode_model(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes);
  auto truncated = [](const char* where) { return corrupt(std::string("truncated at ") + where); };
  auto magic = r.bytes(4);
  if (!magic || !std::equal(magic->begin(), magic->end(), kCheckpointMagic)) {
    throw CheckpointError(CheckpointErrorKind::bad_magic, "not an FHVM checkpoint (bad magic)");
  }
  auto version = r.u32();
  if (!version) throw truncated("version");
  if (*version != kCheckpointVersion) {
    throw CheckpointError(CheckpointErrorKind::version_mismatch,
                          "checkpoint version " + std::to_string(*version) + " is not supported (expected " +
                              std::to_string(kCheckpointVersion) + ")");
  }
  auto cfg_len = r.u32();
  if (!cfg_len) throw truncated("config length");
  auto cfg = r.text(*cfg_len);
  if (!cfg) throw truncated("config");
  FhvaeModel m;
  m.config = parse_config_text(*cfg);

  auto count = r.u32();
  if (!count) throw truncated("section count");
  std::map<std::string, Tensor> sections;
  for (std::uint32_t s = 0; s < *count; ++s) {
    auto name_len = r.u32();
    if (!name_len) throw truncated("section name length");
    auto name = r.text(*name_len);
    if (!name) throw truncated("section name");
    auto rank = r.u32();
    if (!rank) throw truncated("section rank");
    if (*rank == 0 || *rank > 2) throw corrupt("section " + *name + " has unsupported rank");
    Shape shape;
    std::size_t n = 1;
    for (std::uint32_t k = 0; k < *rank; ++k) {
      auto d = r.u32();
      if (!d) throw truncated("section dims");
      shape.push_back(*d);
      n *= *d;
    }
    if (r.remaining() / 8 < n) throw truncated("section data");
    std::vector<double> data(n);
    for (double& v : data) v = *r.f64();
    for (double v : data) {
      if (!std::isfinite(v)) throw corrupt("section " + *name + " holds a non-finite value");
    }
    if (!sections.emplace(*name, Tensor(std::move(shape), std::move(data))).second) {
      throw corrupt("duplicate section " + *name);
    }
  }
  if (r.remaining() != 0) throw corrupt("trailing bytes");

  try {
    auto mean = take(sections, "norm.mean").values();
    auto sd = take(sections, "norm.std").values();
    m.norm.mean = std::move(mean);
    m.norm.stddev = std::move(sd);
    const Tensor ids = take(sections, "seq.ids");
    const Tensor counts = take(sections, "seq.segments");
    for (double v : ids.data()) m.train_ids.push_back(static_cast<std::int64_t>(v));
    for (double v : counts.data()) {
      if (v < 1.0) throw corrupt("segment count below one");
      m.train_segments.push_back(static_cast<std::size_t>(v));
    }
    m.params = std::move(sections);
    m.validate();
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw corrupt(e.what());
  }
  return m;
}

void save_model(const FhvaeModel& model, const std::filesystem::path& path) {
  auto bytes = encode_model(model);
  try {
    io::write_file(path, bytes);
  } catch (const std::exception& e) {
    throw CheckpointError(CheckpointErrorKind::io, e.what());
  }
}

FhvaeModel load_model(const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes;
  try {
    bytes = io::read_file(path);
  } catch (const std::exception& e) {
    throw CheckpointError(CheckpointErrorKind::io, e.what());
  }
  return decode_model(bytes);
}

}  // namespace fhvc::model
