// Copyright 2026 The RQE Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rqelab/io_util.h"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "rqelab/rng.h"

namespace rqelab {

std::uint64_t HashConfigText(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string HashHex(std::uint64_t hash) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash));
  return std::string(buf);
}

std::string FormatDouble(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  // Shortest representation that round-trips.
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, value);
    if (std::strtod(buf, nullptr) == value) break;
  }
  return std::string(buf);
}

void WriteCsvPreamble(std::ostream& os, std::uint64_t config_hash) {
  os << "# rqe-lab " << kToolVersion << " config=" << HashHex(config_hash)
     << "\n";
}

int WorkerCount() {
  const char* env = std::getenv("RQE_LAB_THREADS");
  if (env != nullptr) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void ParallelFor(int n, const std::function<void(int)>& fn) {
  int workers = std::min(WorkerCount(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([w, n, workers, &fn]() {
      for (int i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

int SampleCategorical(Rng& rng, std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  double u = UniformDouble(rng) * total;
  double acc = 0.0;
  for (size_t j = 0; j < weights.size(); ++j) {
    acc += weights[j];
    if (u < acc) return static_cast<int>(j);
  }
  return static_cast<int>(weights.size()) - 1;
}

std::vector<double> SampleSimplexUniform(Rng& rng, int n) {
  std::vector<double> x(n);
  double total = 0.0;
  for (int j = 0; j < n; ++j) {
    // Exponential(1) via inverse CDF; 1-u keeps the argument positive.
    x[j] = -std::log(1.0 - UniformDouble(rng));
    total += x[j];
  }
  for (int j = 0; j < n; ++j) x[j] /= total;
  return x;
}

std::uint64_t DeriveSeed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

const Checkpoint::Table* Checkpoint::Find(const std::string& name) const {
  for (const auto& t : tables) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

void Checkpoint::Add(const std::string& name, std::uint64_t rows,
                     std::uint64_t cols, std::vector<double> data) {
  if (data.size() != rows * cols) {
    throw std::invalid_argument("checkpoint table shape mismatch: " + name);
  }
  tables.push_back(Table{name, rows, cols, std::move(data)});
}

namespace {

constexpr char kCheckpointMagic[5] = {'S', 'R', 'P', 'O', '1'};

template <typename T>
void PutLe(std::ostream& os, T value) {
  unsigned char buf[sizeof(T)];
  std::uint64_t bits;
  std::memcpy(&bits, &value, sizeof(T));
  for (size_t i = 0; i < sizeof(T); ++i) {
    buf[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
  }
  os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T GetLe(std::istream& is) {
  unsigned char buf[sizeof(T)];
  is.read(reinterpret_cast<char*>(buf), sizeof(T));
  std::uint64_t bits = 0;
  for (size_t i = 0; i < sizeof(T); ++i) {
    bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  }
  T value;
  std::memcpy(&value, &bits, sizeof(T));
  return value;
}

void PutF64(std::ostream& os, double value) {
  std::uint64_t bits;
  std::memcpy(&bits, &value, sizeof(double));
  PutLe<std::uint64_t>(os, bits);
}

double GetF64(std::istream& is) {
  std::uint64_t bits = GetLe<std::uint64_t>(is);
  double value;
  std::memcpy(&value, &bits, sizeof(double));
  return value;
}

}  // namespace

void SaveCheckpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  os.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  PutLe<std::uint64_t>(os, ckpt.config_hash);
  PutLe<std::uint32_t>(os, static_cast<std::uint32_t>(ckpt.tables.size()));
  for (const auto& t : ckpt.tables) {
    PutLe<std::uint32_t>(os, static_cast<std::uint32_t>(t.name.size()));
    os.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
    PutLe<std::uint64_t>(os, t.rows);
    PutLe<std::uint64_t>(os, t.cols);
    for (double v : t.data) PutF64(os, v);
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

Checkpoint LoadCheckpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[5];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kCheckpointMagic, 5) != 0) {
    throw std::runtime_error("bad checkpoint magic: " + path);
  }
  Checkpoint ckpt;
  ckpt.config_hash = GetLe<std::uint64_t>(is);
  std::uint32_t count = GetLe<std::uint32_t>(is);
  for (std::uint32_t i = 0; i < count; ++i) {
    Checkpoint::Table t;
    std::uint32_t name_len = GetLe<std::uint32_t>(is);
    t.name.resize(name_len);
    is.read(t.name.data(), name_len);
    t.rows = GetLe<std::uint64_t>(is);
    t.cols = GetLe<std::uint64_t>(is);
    t.data.resize(t.rows * t.cols);
    for (auto& v : t.data) v = GetF64(is);
    if (!is) throw std::runtime_error("truncated checkpoint: " + path);
    ckpt.tables.push_back(std::move(t));
  }
  return ckpt;
}

std::string ReadFileText(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void WriteFileText(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for write: " + path);
  os << text;
  if (!os) throw std::runtime_error("write failed: " + path);
}

}  // namespace rqelab
