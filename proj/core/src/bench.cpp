#include "braun/bench.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <latch>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "braun/coarse_heap.hpp"
#include "braun/concurrent_heap.hpp"

namespace braun {

namespace {

constexpr Value kValueBound = Value{1} << 32;

template <class Heap>
class HeapAdapter final : public QueueAdapter {
 public:
  explicit HeapAdapter(Impl impl) : impl_(impl) {}
  HeapAdapter(Impl impl, Heap h) : impl_(impl), heap_(std::move(h)) {}

  Impl impl() const noexcept override { return impl_; }
  void insert(Value v) override { heap_.insert(v); }
  std::optional<Value> remove_min() override { return heap_.remove_min(); }
  std::optional<Value> get_min() const override { return heap_.get_min(); }

  std::unique_ptr<QueueAdapter> snapshot() const override {
    return std::make_unique<HeapAdapter>(impl_, heap_.snapshot());
  }

  std::uint64_t sum() const override {
    std::uint64_t s = 0;
    for (const auto& v : heap_.iterate()) s += static_cast<std::uint64_t>(v);
    return s;
  }

  std::size_t size() const override { return heap_.size(); }

  bool verify() const override {
    if constexpr (requires { heap_.root_node(); }) {
      const StructReport r = inspect_heap(heap_);
      return r.is_braun && r.is_heap && r.size == heap_.size() &&
             r.depth <= braun_depth_bound(r.size);
    } else {
      return heap_.is_heap();
    }
  }

 private:
  Impl impl_;
  Heap heap_;
};

using BenchBraun = BraunHeap<Value>;
using BenchCoarse = CoarseHeap<Value>;

std::uint64_t now_ns() { return detail::now_ns(); }

struct Timing {
  std::uint64_t start = 0;
  std::uint64_t end = 0;
};

// Runs body(t) on `threads` workers released together; returns the span from
// the first start to the last finish.
template <class Body>
std::uint64_t timed_parallel(unsigned threads, Body&& body) {
  std::vector<Timing> timing(threads);
  std::latch start(threads);
  {
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      workers.emplace_back([&, t] {
        start.arrive_and_wait();
        timing[t].start = now_ns();
        body(t);
        timing[t].end = now_ns();
      });
    }
  }
  std::uint64_t first = timing.front().start;
  std::uint64_t last = timing.front().end;
  for (const auto& tm : timing) {
    first = std::min(first, tm.start);
    last = std::max(last, tm.end);
  }
  return last - first;
}

std::unique_ptr<QueueAdapter> build(Impl impl, const std::vector<Value>& values) {
  auto q = make_queue(impl);
  for (Value v : values) q->insert(v);
  return q;
}

double work_units(const BenchConfig& cfg, unsigned threads) {
  switch (cfg.workload) {
    case Workload::kSum:
      return static_cast<double>(threads) * static_cast<double>(cfg.init_size);
    case Workload::kSnapOnly:
      return threads;
    default:
      return static_cast<double>(cfg.total_ops);
  }
}

BenchRecord run_one(const BenchConfig& cfg, unsigned threads) {
  BenchRecord rec;
  rec.impl = cfg.impl;
  rec.workload = cfg.workload;
  rec.threads = threads;
  rec.init_size = cfg.init_size;
  rec.total_ops = cfg.total_ops;
  rec.work_units = work_units(cfg, threads);

  const std::vector<Value> initial = workload_values(cfg.seed, cfg.init_size, kValueBound);
  const std::vector<Value> op_values = workload_values(cfg.seed + 1, cfg.total_ops, kValueBound);
  const std::uint64_t expected_sum =
      std::accumulate(initial.begin(), initial.end(), std::uint64_t{0},
                      [](std::uint64_t a, Value v) { return a + static_cast<std::uint64_t>(v); });
  const std::size_t per_thread = cfg.total_ops / threads;

  auto queue = build(cfg.impl, initial);

  const unsigned total_iters = cfg.warmup_iters + cfg.measure_iters;
  for (unsigned iter = 0; iter < total_iters; ++iter) {
    std::uint64_t nanos = 0;
    switch (cfg.workload) {
      case Workload::kInsert: {
        nanos = timed_parallel(threads, [&](unsigned t) {
          for (std::size_t i = t * per_thread; i < (t + 1) * per_thread; ++i) queue->insert(op_values[i]);
        });
        queue = build(cfg.impl, initial);
        break;
      }
      case Workload::kRemoveMin: {
        std::vector<std::vector<Value>> removed(threads);
        nanos = timed_parallel(threads, [&](unsigned t) {
          removed[t].reserve(per_thread);
          for (std::size_t i = 0; i < per_thread; ++i) {
            if (auto v = queue->remove_min()) removed[t].push_back(*v);
          }
        });
        for (const auto& r : removed) {
          for (Value v : r) queue->insert(v);
        }
        break;
      }
      case Workload::kSum: {
        std::vector<std::uint64_t> sums(threads);
        nanos = timed_parallel(threads, [&](unsigned t) { sums[t] = queue->sum(); });
        for (std::uint64_t s : sums) {
          if (s != expected_sum && rec.failure.empty()) rec.failure = "sum mismatch";
        }
        break;
      }
      case Workload::kSnapInsert: {
        std::vector<std::unique_ptr<QueueAdapter>> snaps(threads);
        nanos = timed_parallel(threads, [&](unsigned t) {
          snaps[t] = queue->snapshot();
          for (std::size_t i = t * per_thread; i < (t + 1) * per_thread; ++i) snaps[t]->insert(op_values[i]);
        });
        if (cfg.verify) {
          for (const auto& s : snaps) {
            if (!s->verify() && rec.failure.empty()) rec.failure = "snapshot failed structural check";
          }
        }
        snaps.clear();
        break;
      }
      case Workload::kSnapOnly: {
        std::vector<std::unique_ptr<QueueAdapter>> snaps(threads);
        nanos = timed_parallel(threads, [&](unsigned t) { snaps[t] = queue->snapshot(); });
        snaps.clear();
        break;
      }
    }

    if (cfg.verify) {
      if ((!queue->verify() || queue->size() != initial.size()) && rec.failure.empty()) {
        rec.failure = "structural check failed after iteration " + std::to_string(iter);
      }
    }
    if (iter >= cfg.warmup_iters) rec.nanos.push_back(nanos);
  }

  if (!rec.nanos.empty()) {
    const double n = static_cast<double>(rec.nanos.size());
    rec.mean_ns = std::accumulate(rec.nanos.begin(), rec.nanos.end(), 0.0) / n;
    double sq = 0.0;
    for (auto x : rec.nanos) sq += (static_cast<double>(x) - rec.mean_ns) * (static_cast<double>(x) - rec.mean_ns);
    rec.stddev_ns = std::sqrt(sq / n);
  }
  return rec;
}

}  // namespace

std::string_view to_string(Impl impl) noexcept {
  switch (impl) {
    case Impl::kBraun:
      return "braun";
    case Impl::kCoarse:
      return "coarse";
  }
  return "?";
}

std::string_view to_string(Workload w) noexcept {
  switch (w) {
    case Workload::kInsert:
      return "insert";
    case Workload::kRemoveMin:
      return "removemin";
    case Workload::kSum:
      return "sum";
    case Workload::kSnapInsert:
      return "snap-insert";
    case Workload::kSnapOnly:
      return "snap-only";
  }
  return "?";
}

std::optional<Impl> parse_impl(std::string_view s) noexcept {
  for (Impl i : {Impl::kBraun, Impl::kCoarse}) {
    if (s == to_string(i)) return i;
  }
  return std::nullopt;
}

std::optional<Workload> parse_workload(std::string_view s) noexcept {
  for (Workload w : {Workload::kInsert, Workload::kRemoveMin, Workload::kSum, Workload::kSnapInsert,
                     Workload::kSnapOnly}) {
    if (s == to_string(w)) return w;
  }
  return std::nullopt;
}

std::unique_ptr<QueueAdapter> make_queue(Impl impl) {
  switch (impl) {
    case Impl::kBraun:
      return std::make_unique<HeapAdapter<BenchBraun>>(impl);
    case Impl::kCoarse:
      return std::make_unique<HeapAdapter<BenchCoarse>>(impl);
  }
  throw std::invalid_argument("unknown implementation");
}

void validate(const BenchConfig& cfg) {
  if (cfg.threads.empty()) throw std::invalid_argument("no thread counts given");
  for (unsigned t : cfg.threads) {
    if (t == 0) throw std::invalid_argument("thread count must be positive");
    if (cfg.total_ops % t != 0) {
      throw std::invalid_argument("ops (" + std::to_string(cfg.total_ops) + ") not divisible by threads (" +
                                  std::to_string(t) + ")");
    }
  }
  if (cfg.measure_iters == 0) throw std::invalid_argument("need at least one measured iteration");
}

std::vector<BenchRecord> run_bench(const BenchConfig& cfg) {
  validate(cfg);
  std::vector<BenchRecord> out;
  out.reserve(cfg.threads.size());
  for (unsigned t : cfg.threads) out.push_back(run_one(cfg, t));

  auto base = std::find_if(out.begin(), out.end(), [](const BenchRecord& r) { return r.threads == 1; });
  if (base != out.end() && base->mean_ns > 0) {
    const double base_rate = base->work_units / base->mean_ns;
    for (auto& r : out) {
      if (r.mean_ns > 0) r.speedup = (r.work_units / r.mean_ns) / base_rate;
    }
    base->speedup = 1.0;
  }
  return out;
}

void write_csv(const std::vector<BenchRecord>& records, std::ostream& out, bool header) {
  if (header) out << "impl,test,threads,init_size,total_ops,iter,nanos\n";
  for (const auto& r : records) {
    for (std::size_t i = 0; i < r.nanos.size(); ++i) {
      out << to_string(r.impl) << ',' << to_string(r.workload) << ',' << r.threads << ',' << r.init_size << ','
          << r.total_ops << ',' << i << ',' << r.nanos[i] << '\n';
    }
  }
}

void emit_csv(const std::vector<BenchRecord>& records, const std::string& path, bool append) {
  bool header = true;
  if (append) {
    std::ifstream existing(path, std::ios::binary | std::ios::ate);
    header = !existing || existing.tellg() <= 0;
  }
  std::ofstream out(path, std::ios::binary | (append ? std::ios::app : std::ios::trunc));
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_csv(records, out, header);
  out.flush();
  if (!out) throw std::runtime_error("failed writing " + path);
}

std::vector<CsvRow> read_csv(std::istream& in) {
  std::vector<CsvRow> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1) {
      if (line != "impl,test,threads,init_size,total_ops,iter,nanos") {
        throw std::runtime_error("line 1: unexpected header");
      }
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() != 7) throw std::runtime_error("line " + std::to_string(lineno) + ": expected 7 fields");
    try {
      CsvRow row;
      row.impl = fields[0];
      row.test = fields[1];
      row.threads = static_cast<unsigned>(std::stoul(fields[2]));
      row.init_size = std::stoull(fields[3]);
      row.total_ops = std::stoull(fields[4]);
      row.iter = static_cast<unsigned>(std::stoul(fields[5]));
      row.nanos = std::stoull(fields[6]);
      rows.push_back(std::move(row));
    } catch (const std::logic_error&) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": malformed number");
    }
  }
  return rows;
}

}  // namespace braun
