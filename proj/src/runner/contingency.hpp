#ifndef CASCSIM_RUNNER_CONTINGENCY_HPP
#define CASCSIM_RUNNER_CONTINGENCY_HPP

#include <vector>

#include "cascade/cascade.hpp"

namespace cascsim::runner {

// Runs one cascade per event over a fixed worker pool. Results come back in
// input order and are byte-identical for any parallelism level; workers only
// ever write their own slot.
std::vector<cascade::CascadeReport> run_contingency_set(
    const net::Network& net, const std::vector<net::Event>& events,
    const cascade::CascadeParams& params, int parallelism);

}  // namespace cascsim::runner

#endif
