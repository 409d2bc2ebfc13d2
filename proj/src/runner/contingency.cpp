#include "runner/contingency.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace cascsim::runner {

std::vector<cascade::CascadeReport> run_contingency_set(
    const net::Network& net, const std::vector<net::Event>& events,
    const cascade::CascadeParams& params, int parallelism) {
  std::vector<cascade::CascadeReport> out(events.size());
  if (events.empty()) return out;

  int workers = std::clamp<int>(parallelism, 1,
                                static_cast<int>(events.size()));
  std::atomic<size_t> next{0};
  auto work = [&] {
    for (size_t i = next.fetch_add(1); i < events.size();
         i = next.fetch_add(1))
      out[i] = cascade::run_cascade(net, events[i], params);
  };

  if (workers == 1) {
    work();
    return out;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace cascsim::runner
