#pragma once

// Benchmark harness for the five workloads: Insert, RemoveMin, Sum,
// Snap+Insert and Snap-Only. Each runs on t threads released together from a
// latch; an iteration's time spans the earliest worker start to the latest
// worker finish.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "braun/verification.hpp"

namespace braun {

enum class Impl : std::uint8_t { kBraun, kCoarse };
enum class Workload : std::uint8_t { kInsert, kRemoveMin, kSum, kSnapInsert, kSnapOnly };

std::string_view to_string(Impl impl) noexcept;
std::string_view to_string(Workload w) noexcept;
std::optional<Impl> parse_impl(std::string_view s) noexcept;
std::optional<Workload> parse_workload(std::string_view s) noexcept;

// Uniform surface over the concurrent heap and the baseline so the harness
// can drive either.
class QueueAdapter {
 public:
  virtual ~QueueAdapter() = default;

  virtual Impl impl() const noexcept = 0;
  virtual void insert(Value v) = 0;
  virtual std::optional<Value> remove_min() = 0;
  virtual std::optional<Value> get_min() const = 0;
  virtual std::unique_ptr<QueueAdapter> snapshot() const = 0;
  // Wrapping sum of every element, read through the queue's iterator.
  virtual std::uint64_t sum() const = 0;
  virtual std::size_t size() const = 0;
  // Quiescent structural check (shape + order + size bookkeeping).
  virtual bool verify() const = 0;
};

std::unique_ptr<QueueAdapter> make_queue(Impl impl);

struct BenchConfig {
  Impl impl = Impl::kBraun;
  Workload workload = Workload::kInsert;
  // One record is produced per entry.
  std::vector<unsigned> threads{1};
  std::size_t init_size = std::size_t{1} << 16;
  // Must be divisible by every thread count.
  std::size_t total_ops = 1344;
  unsigned warmup_iters = 3;
  unsigned measure_iters = 5;
  std::uint64_t seed = 1;
  // Run the structural checks after every iteration.
  bool verify = false;
};

struct BenchRecord {
  Impl impl = Impl::kBraun;
  Workload workload = Workload::kInsert;
  unsigned threads = 1;
  std::size_t init_size = 0;
  std::size_t total_ops = 0;
  std::vector<std::uint64_t> nanos;
  double mean_ns = 0.0;
  double stddev_ns = 0.0;
  // Throughput relative to the 1-thread record of the same sweep, if any.
  std::optional<double> speedup;
  // Work units per iteration (elements or snapshots handled), used for
  // throughput: total_ops for the insert/remove tests, threads * init_size
  // for Sum, threads for Snap-Only.
  double work_units = 0.0;
  // Empty on success; otherwise what the Sum or --verify checks found.
  std::string failure;
};

// Throws std::invalid_argument if the configuration is unusable.
void validate(const BenchConfig& cfg);

std::vector<BenchRecord> run_bench(const BenchConfig& cfg);

// Header `impl,test,threads,init_size,total_ops,iter,nanos`, then one row per
// timed iteration. With append=true and a non-empty existing file, the header
// is not repeated. Throws std::runtime_error if the file cannot be written.
void emit_csv(const std::vector<BenchRecord>& records, const std::string& path, bool append = false);
void write_csv(const std::vector<BenchRecord>& records, std::ostream& out, bool header = true);

struct CsvRow {
  std::string impl;
  std::string test;
  unsigned threads = 0;
  std::size_t init_size = 0;
  std::size_t total_ops = 0;
  unsigned iter = 0;
  std::uint64_t nanos = 0;
};

// Throws std::runtime_error naming the offending line.
std::vector<CsvRow> read_csv(std::istream& in);

}  // namespace braun
