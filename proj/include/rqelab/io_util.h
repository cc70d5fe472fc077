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

#ifndef RQELAB_IO_UTIL_H_
#define RQELAB_IO_UTIL_H_

#include <cstdint>
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace rqelab {

inline constexpr const char* kToolVersion = "0.1.0";

// FNV-1a over the canonical config text; stable across runs and platforms.
std::uint64_t HashConfigText(const std::string& text);
std::string HashHex(std::uint64_t hash);

// Shortest round-trip decimal for a double ("%.17g" trimmed); identical
// input bits always produce identical text, which is what the determinism
// contract on CSV artifacts needs.
std::string FormatDouble(double value);

// Every emitted CSV starts with this comment line.
void WriteCsvPreamble(std::ostream& os, std::uint64_t config_hash);

// Worker count: RQE_LAB_THREADS if set (>= 1), else hardware concurrency.
int WorkerCount();

// Runs fn(i) for i in [0, n) over a static partition of WorkerCount()
// threads. Items must be independent; results keyed by index stay
// deterministic regardless of the thread count.
void ParallelFor(int n, const std::function<void(int)>& fn);

// Flat binary checkpoint: magic "SRPO1", u64 config hash, u32 table count,
// then per table {u32 name length, name bytes, u64 rows, u64 cols,
// rows*cols little-endian f64, row-major}.
struct Checkpoint {
  std::uint64_t config_hash = 0;
  // Ordered name -> (rows, cols, data).
  struct Table {
    std::string name;
    std::uint64_t rows = 0;
    std::uint64_t cols = 0;
    std::vector<double> data;
  };
  std::vector<Table> tables;

  const Table* Find(const std::string& name) const;
  void Add(const std::string& name, std::uint64_t rows, std::uint64_t cols,
           std::vector<double> data);
};

void SaveCheckpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint LoadCheckpoint(const std::string& path);

std::string ReadFileText(const std::string& path);
void WriteFileText(const std::string& path, const std::string& text);

}  // namespace rqelab

#endif  // RQELAB_IO_UTIL_H_
