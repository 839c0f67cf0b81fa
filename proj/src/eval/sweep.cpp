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


#include "fhvc/eval/sweep.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <thread>

#include "fhvc/convert/convert.hpp"
#include "fhvc/core/rng.hpp"
#include "fhvc/eval/metrics.hpp"

namespace fhvc::eval {

namespace {

struct Layout {
  std::vector<std::size_t> speakers;
  std::map<std::size_t, std::vector<std::size_t>> pool;                           // speaker → sequence indices
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> test;               // (speaker, content) → index
};

Layout index_corpus(const SweepInput& in) {
  if (in.speaker.size() != in.sequences.size() || in.content.size() != in.sequences.size()) {
    throw EvalError("sweep: speaker/content labels must cover every sequence");
  }
  if (in.test_contents.empty()) throw EvalError("sweep: no test content indices");
  const std::set<std::size_t> test(in.test_contents.begin(), in.test_contents.end());
  Layout l;
  std::set<std::size_t> speakers;
  for (std::size_t i = 0; i < in.sequences.size(); ++i) {
    speakers.insert(in.speaker[i]);
    if (test.count(in.content[i])) {
      if (!l.test.emplace(std::pair{in.speaker[i], in.content[i]}, i).second) {
        throw EvalError("sweep: duplicate (speaker, content) test utterance");
      }
    } else {
      l.pool[in.speaker[i]].push_back(i);
    }
  }
  l.speakers.assign(speakers.begin(), speakers.end());
  if (l.speakers.size() < 2) throw EvalError("sweep: need at least two speakers");
  for (std::size_t s : l.speakers) {
    for (std::size_t c : test) {
      if (!l.test.count({s, c})) {
        throw EvalError("sweep: speaker " + std::to_string(s) + " lacks test content " + std::to_string(c));
      }
    }
  }
  return l;
}

double run_repeat(const SweepInput& in, const Layout& l, const model::FhvaeModel& model, std::size_t n,
                  SeededRng rng, bool align) {
  std::map<std::size_t, convert::SpeakerEmbedding> emb;
  for (std::size_t s : l.speakers) {
    std::vector<std::size_t> pool = l.pool.at(s);
    SeededRng draw = rng.stream("speaker", s);
    std::vector<corpus::FeatureSequence> chosen;
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t j = k + static_cast<std::size_t>(draw.below(pool.size() - k));
      std::swap(pool[k], pool[j]);
      chosen.push_back(in.sequences[pool[k]]);
    }
    emb.emplace(s, convert::speaker_embedding(chosen, model));
  }
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t a : l.speakers) {
    for (std::size_t b : l.speakers) {
      if (a == b) continue;
      for (std::size_t c : in.test_contents) {
        const auto& src = in.sequences[l.test.at({a, c})];
        const auto& ref = in.sequences[l.test.at({b, c})];
        auto out = convert::convert_difference(src, emb.at(a), emb.at(b), model);
        if (align || out.num_frames() != ref.num_frames()) {
          total += mel_cd(out.frames, ref.frames, dtw_align(out.frames, ref.frames).path);
        } else {
          total += mel_cd(out.frames, ref.frames);
        }
        ++count;
      }
    }
  }
  return total / static_cast<double>(count);
}

}  // namespace

std::vector<SweepRow> sweep_training_size(const SweepInput& input, const model::FhvaeModel& model,
                                          std::span<const std::size_t> ns, std::uint64_t seed,
                                          const SweepOptions& options) {
  if (ns.empty()) return {};
  if (options.repeats == 0) throw EvalError("sweep: repeats must be positive");
  const Layout layout = index_corpus(input);
  std::size_t available = SIZE_MAX;
  for (std::size_t s : layout.speakers) {
    auto it = layout.pool.find(s);
    available = std::min(available, it == layout.pool.end() ? std::size_t{0} : it->second.size());
  }
  std::string bad;
  for (std::size_t n : ns) {
    if (n == 0 || n > available) bad += (bad.empty() ? "" : ", ") + std::to_string(n);
  }
  if (!bad.empty()) {
    throw EvalError("sweep: n = " + bad + " not in [1, " + std::to_string(available) +
                    "] (pool utterances per speaker)");
  }

  struct Job {
    std::size_t row;
    std::size_t n;
    std::size_t repeat;
  };
  std::vector<Job> jobs;
  for (std::size_t r = 0; r < ns.size(); ++r) {
    for (std::size_t k = 0; k < options.repeats; ++k) jobs.push_back({r, ns[r], k});
  }
  std::vector<double> values(jobs.size());
  const SeededRng root = SeededRng(seed).stream("sweep");

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      try {
        const Job& job = jobs[j];
        values[j] = run_repeat(input, layout, model, job.n, root.stream("n", job.n).stream("repeat", job.repeat),
                               options.align);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(options.workers, jobs.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<SweepRow> rows(ns.size());
  for (std::size_t r = 0; r < ns.size(); ++r) {
    rows[r].n_sentences = ns[r];
    rows[r].runs = options.repeats;
    double s = 0.0;
    for (std::size_t k = 0; k < options.repeats; ++k) s += values[r * options.repeats + k];
    rows[r].mel_cd_db = s / static_cast<double>(options.repeats);
    if (options.repeats > 1) {
      double v = 0.0;
      for (std::size_t k = 0; k < options.repeats; ++k) {
        const double d = values[r * options.repeats + k] - rows[r].mel_cd_db;
        v += d * d;
      }
      rows[r].std = std::sqrt(v / static_cast<double>(options.repeats - 1));
    }
  }
  return rows;
}

}  // namespace fhvc::eval
