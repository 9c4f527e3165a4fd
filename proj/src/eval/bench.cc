// Copyright 2026 The s2ut Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "s2ut/bench.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "s2ut/error.h"

namespace s2ut {

namespace {

double time_decode(const S2utModel& model, const FeatureSequence& x, DecodeResult* out) {
  const auto start = std::chrono::steady_clock::now();
  *out = model.decode(x);
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(stop - start).count();
}

// One decoder pass per emitted symbol for AR, a single pass for NAR.
bool accounting_holds(const S2utModel& model, const DecodeResult& r) {
  if (model.config().variant == ModelVariant::kAr) return r.decoder_passes == r.output_length;
  return r.decoder_passes == 1;
}

std::string range_label(const BenchRow& r) {
  return "[" + std::to_string(r.lo) + "," + (r.hi ? std::to_string(*r.hi) + ")" : "inf)");
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

std::string hardware_description() {
  std::string cpu = "unknown cpu";
  std::ifstream in("/proc/cpuinfo");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("model name", 0) == 0) {
      cpu = line.substr(line.find(':') + 2);
      break;
    }
  }
  return cpu + ", " + std::to_string(std::thread::hardware_concurrency()) +
         " hardware threads, CPU only, 1 worker, batch size 1";
}

BenchReport bench_latency(const S2utModel& ar, const S2utModel& nar, const Dataset& data,
                          const std::vector<std::size_t>& edges, std::size_t warmup,
                          std::size_t repeats) {
  require_same_encoder(ar.config(), nar.config());
  if (data.size() == 0) throw ConfigError("bench set is empty");
  if (repeats == 0) throw ConfigError("bench repeats must be positive");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (edges[i] == 0 || (i && edges[i] <= edges[i - 1])) {
      throw ConfigError("bucket edges must be positive and strictly increasing");
    }
  }

  BenchReport report;
  report.hardware = hardware_description();
  std::size_t lo = 0;
  for (std::size_t e : edges) {
    BenchRow row;
    row.lo = lo;
    row.hi = e;
    report.rows.push_back(row);
    lo = e;
  }
  BenchRow last;
  last.lo = lo;
  report.rows.push_back(last);

  DecodeResult scratch;
  for (std::size_t i = 0; i < std::min(warmup, data.size()); ++i) {
    time_decode(ar, data.features[i], &scratch);
    time_decode(nar, data.features[i], &scratch);
  }

  double ar_total = 0.0, nar_total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const FeatureSequence& x = data.features[i];
    DecodeResult a, n;
    double ta = std::numeric_limits<double>::infinity(), tn = ta;
    for (std::size_t k = 0; k < repeats; ++k) {
      ta = std::min(ta, time_decode(ar, x, &a));
      tn = std::min(tn, time_decode(nar, x, &n));
    }
    if (!accounting_holds(ar, a)) ++report.ar_step_mismatches;
    if (!accounting_holds(nar, n)) ++report.nar_pass_mismatches;
    std::size_t b = 0;
    while (b < edges.size() && x.length() >= edges[b]) ++b;
    BenchRow& row = report.rows[b];
    ++row.count;
    row.ar_ms += ta;
    row.nar_ms += tn;
    row.ar_steps += double(a.decoder_passes);
    row.nar_passes += double(n.decoder_passes);
    ar_total += ta;
    nar_total += tn;
  }
  for (BenchRow& row : report.rows) {
    if (row.count == 0) continue;
    const double c = double(row.count);
    row.ar_ms /= c;
    row.nar_ms /= c;
    row.ar_steps /= c;
    row.nar_passes /= c;
    row.speedup = row.ar_ms / row.nar_ms;
  }
  report.samples = data.size();
  report.overall_speedup = ar_total / nar_total;
  return report;
}

std::string BenchReport::table() const {
  std::ostringstream os;
  os << "# hardware: " << hardware << "\n";
  os << "frames        count   ar_ms      nar_ms     speedup   ar_steps  nar_passes\n";
  for (const BenchRow& r : rows) {
    char line[160];
    std::snprintf(line, sizeof line, "%-13s %-7zu %-10s %-10s %-9s %-9s %s\n",
                  range_label(r).c_str(), r.count, fixed(r.ar_ms, 3).c_str(),
                  fixed(r.nar_ms, 3).c_str(),
                  r.speedup ? (fixed(*r.speedup, 2) + "x").c_str() : "-",
                  fixed(r.ar_steps, 1).c_str(), fixed(r.nar_passes, 1).c_str());
    os << line;
  }
  os << "overall speedup: " << fixed(overall_speedup, 2) << "x over " << samples
     << " samples\n";
  os << "iteration accounting: " << ar_step_mismatches << " ar mismatches, "
     << nar_pass_mismatches << " nar mismatches\n";
  return os.str();
}

std::string BenchReport::tsv() const {
  std::ostringstream os;
  os << "# hardware: " << hardware << "\n";
  os << "lo\thi\tcount\tar_ms\tnar_ms\tspeedup\tar_steps\tnar_passes\n";
  for (const BenchRow& r : rows) {
    os << r.lo << '\t' << (r.hi ? std::to_string(*r.hi) : "inf") << '\t' << r.count << '\t'
       << fixed(r.ar_ms, 6) << '\t' << fixed(r.nar_ms, 6) << '\t'
       << (r.speedup ? fixed(*r.speedup, 6) : "NA") << '\t' << fixed(r.ar_steps, 3) << '\t'
       << fixed(r.nar_passes, 3) << '\n';
  }
  os << "all\tinf\t" << samples << "\t\t\t" << fixed(overall_speedup, 6) << "\t\t\n";
  return os.str();
}

}  // namespace s2ut
