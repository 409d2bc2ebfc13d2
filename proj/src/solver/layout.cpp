#include "solver/layout.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cascsim::solver {

namespace {

curve::PatchedCurve make_clamp(const net::Generator& g) {
  double lo = std::min(g.p_min - g.p_set, 0.0);
  double hi = std::max(g.p_max - g.p_set, 0.0);
  double gain = std::max(g.droop, 0.0);
  return curve::build_clamp_curve(gain, lo, hi,
                                  curve::default_clamp_delta(gain, lo, hi));
}

curve::PatchedCurve make_step(const net::ShedSegment& s, double default_beta) {
  // The response ramps from 0 to 1 as the watched quantity falls below the
  // threshold: df below a negative threshold for UFLS, |V| below a positive
  // one for UVLS. Both are the same falling curve in the watched variable.
  double beta = s.beta > 0 ? s.beta : default_beta;
  return curve::build_step_curve(s.threshold, beta,
                                 curve::default_step_delta(beta));
}

}  // namespace

Layout::Layout(const net::Network& net, const net::Island& island,
               const SolverOptions& opts, const PinMap& pins,
               std::optional<bool> df_pin_override)
    : net_(&net), island_(island), bus_ids_(island.buses) {
  if (island.reference_gen < 0)
    throw std::invalid_argument("island has no reference generator");
  for (int i = 0; i < static_cast<int>(bus_ids_.size()); ++i)
    bus_local_[bus_ids_[i]] = i;

  for (int gid : island.generators) {
    const auto& g = net.generators[net.gen_index(gid)];
    if (gid == island.reference_gen) {
      ref_.id = gid;
      ref_.idx = net.gen_index(gid);
      ref_.lb = bus_local_.at(g.bus);
      ref_.p_set = g.p_set;
      ref_.v_set = g.v_set;
      ref_.gain = std::max(g.droop, 0.0);
    } else {
      PvGen pv;
      pv.id = gid;
      pv.idx = net.gen_index(gid);
      pv.lb = bus_local_.at(g.bus);
      pv.p_set = g.p_set;
      pv.v_set = g.v_set;
      pv.clamp = make_clamp(g);
      pv_.push_back(pv);
    }
  }

  bool freq_coupled = ref_.gain > 0;
  for (const auto& pv : pv_)
    if (!pv.clamp.flat()) freq_coupled = true;

  for (int lid : island.loads) {
    const auto& l = net.loads[net.load_index(lid)];
    int lb = bus_local_.at(l.bus);
    double frac_sum = 0;
    for (int si = 0; si < static_cast<int>(l.segments.size()); ++si) {
      const auto& s = l.segments[si];
      frac_sum += s.fraction;
      Seg seg;
      seg.load_id = lid;
      seg.seg_idx = si;
      seg.lb = lb;
      seg.scheme = s.scheme;
      seg.discrete = s.mode == net::ShedMode::discrete;
      seg.curve = make_step(s, opts.discrete_beta);
      seg.p0 = l.p * s.fraction;
      seg.q0 = l.q * s.fraction;
      auto pin = pins.find({lid, si});
      if (pin != pins.end()) {
        seg.pinned = true;
        seg.pin_value = pin->second;
      } else {
        seg.var = n_var_seg_++;
        if (s.scheme == net::ShedScheme::ufls) freq_coupled = true;
      }
      segs_.push_back(seg);
    }
    double rem = 1.0 - frac_sum;
    if (std::abs(l.p * rem) > 0 || std::abs(l.q * rem) > 0)
      fixed_.push_back({lb, l.p * rem, l.q * rem});
  }

  df_pinned_ = df_pin_override ? *df_pin_override : !freq_coupled;

  int n = n_bus();
  n_primal_ = 4 * n + 2 * n_pv() + 3 + n_var_seg_ + 1;
  n_constraint_ = 2 * n + 2 * n_pv() + 2 + n_var_seg_ + 2 + (df_pinned_ ? 1 : 0);
}

int Layout::local_bus(int bus_id) const {
  auto it = bus_local_.find(bus_id);
  if (it == bus_local_.end())
    throw std::invalid_argument("bus " + std::to_string(bus_id) +
                                " is not in this island");
  return it->second;
}

Eigen::VectorXd Layout::initial_state(const WarmStart* warm) const {
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n_total());
  for (int i = 0; i < n_bus(); ++i) z[VR(i)] = 1.0;

  if (!warm) return z;

  for (int i = 0; i < n_bus(); ++i) {
    auto it = warm->bus_v.find(bus_ids_[i]);
    if (it != warm->bus_v.end()) {
      z[VR(i)] = it->second.first;
      z[VI(i)] = it->second.second;
    }
  }
  for (int k = 0; k < n_pv(); ++k) {
    auto it = warm->gen_qdp.find(pv_[k].id);
    if (it != warm->gen_qdp.end()) {
      z[QG(k)] = it->second.first;
      z[DPG(k)] = it->second.second;
    }
  }
  for (const auto& seg : segs_) {
    if (seg.var < 0) continue;
    auto it = warm->seg_alpha.find({seg.load_id, seg.seg_idx});
    if (it != warm->seg_alpha.end())
      z[ALPHA(seg.var)] = std::clamp(it->second, 0.0, 1.0);
  }
  // Frequency deviation carries over from whatever island the reference bus
  // used to belong to; fall back to any island bus with a recorded value.
  auto df = warm->bus_df.find(bus_ids_[ref_.lb]);
  if (df == warm->bus_df.end())
    for (int id : bus_ids_)
      if ((df = warm->bus_df.find(id)) != warm->bus_df.end()) break;
  if (df != warm->bus_df.end() && !df_pinned_) z[DF()] = df->second;
  return z;
}

void Layout::harvest(const Eigen::VectorXd& z, WarmStart& warm) const {
  for (int i = 0; i < n_bus(); ++i) {
    warm.bus_v[bus_ids_[i]] = {z[VR(i)], z[VI(i)]};
    warm.bus_df[bus_ids_[i]] = z[DF()];
  }
  for (int k = 0; k < n_pv(); ++k)
    warm.gen_qdp[pv_[k].id] = {z[QG(k)], z[DPG(k)]};
  for (const auto& seg : segs_)
    warm.seg_alpha[{seg.load_id, seg.seg_idx}] =
        seg.pinned ? seg.pin_value : z[ALPHA(seg.var)];
}

}  // namespace cascsim::solver
