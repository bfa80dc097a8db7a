#include "braun/verification.hpp"

#include <map>

namespace braun {

bool check_conservation(const OpTrace& trace, std::span<const Value> final_contents) {
  // balance[v] = (#initial + #inserted) - (#removed + #final); must end at 0.
  std::map<Value, std::int64_t> present;
  std::map<Value, std::int64_t> removed;
  for (Value v : trace.initial) ++present[v];
  for (const auto& log : trace.per_thread) {
    for (const auto& rec : log) {
      if (rec.kind == OpKind::kInsert) {
        ++present[rec.input];
      } else if (rec.kind == OpKind::kRemoveMin && rec.output) {
        ++removed[*rec.output];
      }
    }
  }
  std::map<Value, std::int64_t> remaining;
  for (Value v : final_contents) ++remaining[v];

  for (const auto& [v, k] : removed) {
    auto it = present.find(v);
    if (it == present.end() || k > it->second) return false;
  }
  for (const auto& [v, k] : present) {
    const auto r = removed.count(v) ? removed.at(v) : 0;
    const auto f = remaining.count(v) ? remaining.at(v) : 0;
    if (k != r + f) return false;
  }
  for (const auto& [v, k] : remaining) {
    if (!present.count(v)) return false;
  }
  return true;
}

bool replay_matches_oracle(const OpTrace& trace) {
  if (trace.per_thread.size() != 1) return false;
  OracleQueue<Value> oracle;
  for (Value v : trace.initial) oracle.insert(v);
  for (const auto& rec : trace.per_thread.front()) {
    switch (rec.kind) {
      case OpKind::kInsert:
        oracle.insert(rec.input);
        break;
      case OpKind::kRemoveMin:
        if (oracle.remove_min() != rec.output) return false;
        break;
      case OpKind::kGetMin:
        if (oracle.get_min() != rec.output) return false;
        break;
      case OpKind::kSnapshot:
        if (rec.output != static_cast<Value>(oracle.size())) return false;
        break;
    }
  }
  return true;
}

std::vector<Value> workload_values(std::uint64_t seed, std::size_t n, Value bound) {
  CounterRng rng(seed, ~std::uint64_t{0});
  std::vector<Value> out(n);
  for (auto& v : out) v = static_cast<Value>(rng.below(static_cast<std::uint64_t>(bound)));
  return out;
}

}  // namespace braun
