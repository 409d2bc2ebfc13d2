#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "net/case_io.hpp"
#include "net/network.hpp"
#include "solver/assemble.hpp"
#include "solver/stage1.hpp"
#include "support/fd_check.hpp"
#include "support/pf_oracle.hpp"

using namespace cascsim;
using fdcheck::curve_inputs;
using fdcheck::fd_matrix_gap;
using fdcheck::random_state;
using fdcheck::state_clear;
using solver::Layout;
using solver::SolveStatus;
using solver::SolverOptions;

namespace {

net::Network fixture(const std::string& name) {
  return net::parse_case_file(std::string(CASCSIM_DATA_DIR) + "/" + name);
}

net::Island only_island(const net::Network& n) {
  auto islands = net::find_islands(n);
  REQUIRE(islands.size() == 1);
  return islands[0];
}

net::Network without_segments(net::Network n) {
  for (auto& l : n.loads) l.segments.clear();
  n.rebuild_index();
  return n;
}

net::Network with_continuous_segments(net::Network n) {
  for (auto& l : n.loads)
    for (auto& s : l.segments) s.mode = net::ShedMode::continuous;
  n.rebuild_index();
  return n;
}

// Mirrors how a caller carries one solve's operating point into the next.
solver::WarmStart warm_from(const solver::SolveResult& r) {
  solver::WarmStart w;
  w.bus_v = r.bus_v;
  w.gen_qdp = r.gen_eff;
  w.seg_alpha = r.seg_alpha;
  for (const auto& [id, v] : r.bus_v) w.bus_df[id] = r.delta_f;
  return w;
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("unknown and constraint counts follow the island composition") {
  SolverOptions opts;

  auto two = fixture("two_bus.json");
  Layout l2(two, only_island(two), opts);
  CHECK(l2.n_bus() == 2);
  CHECK(l2.n_pv() == 0);
  CHECK(l2.n_var_seg() == 1);
  CHECK_FALSE(l2.df_pinned());
  CHECK(l2.n_primal() == 13);
  CHECK(l2.n_constraint() == 9);

  auto ieee = fixture("ieee14.json");
  Layout l14(ieee, only_island(ieee), opts);
  CHECK(l14.n_bus() == 14);
  CHECK(l14.n_pv() == 4);
  CHECK(l14.n_var_seg() == 11);
  CHECK_FALSE(l14.df_pinned());
  CHECK(l14.n_primal() == 79);
  CHECK(l14.n_constraint() == 51);
  CHECK(l14.n_total() == 130);

  // Pinning removes the alpha unknown and its defining constraint together.
  solver::PinMap pins;
  pins[{1, 0}] = 1.0;
  pins[{2, 0}] = 0.0;
  Layout lp(ieee, only_island(ieee), opts, pins);
  CHECK(lp.n_var_seg() == 9);
  CHECK(lp.n_primal() == 77);
  CHECK(lp.n_constraint() == 49);

  // No droop anywhere and no frequency-watching segments: df gets pinned.
  auto dead = two;
  dead.generators[0].droop = 0;
  dead.loads[0].segments.clear();
  dead.rebuild_index();
  Layout ld(dead, only_island(dead), opts);
  CHECK(ld.df_pinned());
  CHECK(ld.n_primal() == 12);
  CHECK(ld.n_constraint() == 9);
}

TEST_CASE("assembled matrix matches finite differences on the stock network") {
  SolverOptions opts;
  auto ieee = fixture("ieee14.json");
  auto island = only_island(ieee);
  Layout L(ieee, island, opts);
  auto inputs = curve_inputs(L);

  std::mt19937 rng(20260816);
  int states = 0;
  while (states < 20) {
    Eigen::VectorXd z = random_state(L, rng, -0.45, 0.05);
    if (!state_clear(L, inputs, z, 1e-5)) continue;
    ++states;
    CAPTURE(states);
    CHECK(fd_matrix_gap(L, z) < 1e-5);
  }

  // The shed curves around the -0.3 Hz threshold: both quadratic patches and
  // the exact ramp. Piece interiors are smooth, so differencing is valid.
  for (double df : {-0.3, -0.3005, -0.301}) {
    Eigen::VectorXd z = random_state(L, rng, df, df);
    z[L.DF()] = df;
    CAPTURE(df);
    CHECK(fd_matrix_gap(L, z) < 1e-5);
  }
}

TEST_CASE("matrix check covers saturating droop and voltage-watching segments") {
  SolverOptions opts;
  auto ieee = fixture("ieee14.json");
  // Second machine gets droop so its saturation curve is live: headroom
  // -0.4/+0.6 p.u. at gain 0.5 saturates at df = +0.8 and -1.2.
  ieee.generators[ieee.gen_index(2)].droop = 0.5;
  // One voltage-watching segment each way plus a shallow frequency ramp.
  auto& l9 = ieee.loads[ieee.load_index(6)];
  l9.segments = {{0.3, net::ShedScheme::uvls, net::ShedMode::continuous, 0.95, 100.0}};
  auto& l10 = ieee.loads[ieee.load_index(7)];
  l10.segments = {{0.2, net::ShedScheme::uvls, net::ShedMode::discrete, 0.9, 1000.0}};
  auto& l14 = ieee.loads[ieee.load_index(11)];
  l14.segments = {{0.25, net::ShedScheme::ufls, net::ShedMode::continuous, -0.25, 40.0}};
  ieee.rebuild_index();

  auto island = only_island(ieee);
  Layout L(ieee, island, opts);
  auto inputs = curve_inputs(L);

  std::mt19937 rng(7150816);
  int states = 0;
  while (states < 20) {
    Eigen::VectorXd z = random_state(L, rng, -1.5, 1.5);
    if (!state_clear(L, inputs, z, 1e-5)) continue;
    ++states;
    CAPTURE(states);
    CHECK(fd_matrix_gap(L, z) < 1e-5);
  }

  // Saturation patches of the droop clamp and the shallow shed ramp.
  for (double df : {-1.2, 0.8, -0.26, -0.25}) {
    Eigen::VectorXd z = random_state(L, rng, df, df);
    z[L.DF()] = df;
    REQUIRE(state_clear(L, inputs, z, 1e-6));
    CAPTURE(df);
    CHECK(fd_matrix_gap(L, z) < 1e-5);
  }

  // Voltage magnitude at bus 9 inside the upper patch of its shed curve.
  {
    Eigen::VectorXd z = random_state(L, rng, -0.1, 0.1);
    int lb = L.local_bus(9);
    z[L.VR(lb)] = 0.9499 * std::cos(0.05);
    z[L.VI(lb)] = 0.9499 * std::sin(0.05);
    REQUIRE(state_clear(L, inputs, z, 1e-6));
    CHECK(fd_matrix_gap(L, z) < 1e-5);
  }
}

TEST_CASE("solves the reference network exactly like a conventional power flow") {
  auto ieee = fixture("ieee14.json");
  auto r = solver::solve_island(ieee, only_island(ieee), SolverOptions{});
  REQUIRE(r.status == SolveStatus::converged);
  CHECK(r.feasible);
  CHECK(r.max_if < 1e-8);
  CHECK(r.shed_p == 0.0);
  CHECK(r.delta_f == doctest::Approx(-0.10797757447618016).epsilon(1e-9));

  auto pf = pftest::solve_pf(ieee);
  REQUIRE(pf.converged);
  for (const auto& [id, v] : r.bus_v) {
    auto ref = pf.v[ieee.bus_index(id)];
    CAPTURE(id);
    CHECK(std::abs(v.first - ref.real()) < 1e-4);
    CHECK(std::abs(v.second - ref.imag()) < 1e-4);
  }
  // Machine picked up exactly what the conventional slack absorbed.
  double p_slack = ieee.generators[0].p_set + r.gen_eff.at(1).second;
  CHECK(p_slack == doctest::Approx(pf.slack_p).epsilon(1e-6));
  CHECK(r.gen_eff.at(1).first ==
        doctest::Approx(pf.qg_bus[ieee.bus_index(1)]).epsilon(1e-5));
}

TEST_CASE("two-bus network reproduces the conventional solution and holds") {
  auto two = fixture("two_bus.json");
  auto r = solver::solve_island(two, only_island(two), SolverOptions{});
  REQUIRE(r.status == SolveStatus::converged);
  CHECK(r.feasible);
  CHECK(r.shed_p == 0.0);
  CHECK(r.delta_f == doctest::Approx(-0.0021297371610091553).epsilon(1e-10));

  auto pf = pftest::solve_pf(two);
  REQUIRE(pf.converged);
  for (const auto& [id, v] : r.bus_v) {
    auto ref = pf.v[two.bus_index(id)];
    CHECK(std::abs(v.first - ref.real()) < 1e-6);
    CHECK(std::abs(v.second - ref.imag()) < 1e-6);
  }
}

TEST_CASE("overload with stepped shedding settles past the frequency threshold") {
  auto ieee = fixture("ieee14.json");
  auto heavy = net::scale_loading(ieee, 4.2);
  auto r = solver::solve_island(heavy, only_island(heavy), SolverOptions{});
  REQUIRE(r.status == SolveStatus::converged);
  CHECK(r.feasible);
  CHECK(r.delta_f < -0.3);
  for (const auto& [key, a] : r.seg_alpha) {
    CAPTURE(key.first);
    CHECK(a == 1.0);
  }
  CHECK(r.shed_p == doctest::Approx(1.8492600000000004).epsilon(1e-9));
  CHECK(r.delta_f == doctest::Approx(-0.4890558578150193).epsilon(1e-9));
}

TEST_CASE("overload without shedding lands on the least-infeasible point") {
  auto bare = without_segments(fixture("ieee14.json"));
  auto heavy = net::scale_loading(bare, 4.2);
  auto r = solver::solve_island(heavy, only_island(heavy), SolverOptions{});
  REQUIRE(r.status == SolveStatus::converged);
  CHECK_FALSE(r.feasible);
  CHECK(r.max_if > 1e-3);
  CHECK(r.worst_if_bus == 14);
  // Unserved demand concentrates away from the source: the reference bus
  // needs no correction at all and the far end carries the worst of it.
  CHECK(r.bus_if.at(1) < 1e-9);
  CHECK(r.bus_if.at(14) > 5 * r.bus_if.at(2));
  CHECK(r.delta_f < -1.5);
  CHECK(r.delta_f > -3.0);
}

TEST_CASE("multipliers at the least-infeasible point mirror the correction") {
  SolverOptions opts;
  auto bare = without_segments(fixture("ieee14.json"));
  auto heavy = net::scale_loading(bare, 4.2);
  auto island = only_island(heavy);

  Eigen::VectorXd z;
  auto out = solver::homotopy_solve(heavy, island, opts, {}, false, z);
  REQUIRE(out.status == SolveStatus::converged);

  Layout L(heavy, island, opts, {}, false);
  solver::Assembly A;
  solver::assemble(L, z, false, A);
  CHECK(A.F.lpNorm<Eigen::Infinity>() < 1e-8);
  for (int i = 0; i < L.n_bus(); ++i) {
    CHECK(z[L.LAMBDA(L.C_KCL_R(i))] ==
          doctest::Approx(2 * z[L.IFR(i)]).epsilon(1e-8));
    CHECK(z[L.LAMBDA(L.C_KCL_I(i))] ==
          doctest::Approx(2 * z[L.IFI(i)]).epsilon(1e-8));
  }
}

TEST_CASE("warm start from the previous point does not cost iterations") {
  auto ieee = fixture("ieee14.json");
  auto island = only_island(ieee);
  auto base = solver::solve_island(ieee, island, SolverOptions{});
  REQUIRE(base.status == SolveStatus::converged);

  auto bumped = net::scale_loading(ieee, 1.05);
  auto cold = solver::solve_island(bumped, island, SolverOptions{});
  auto warm_state = warm_from(base);
  auto warm = solver::solve_island(bumped, island, SolverOptions{}, &warm_state);
  REQUIRE(cold.status == SolveStatus::converged);
  REQUIRE(warm.status == SolveStatus::converged);
  CHECK(warm.iterations <= cold.iterations);
  CHECK(warm.delta_f == doctest::Approx(cold.delta_f).epsilon(1e-9));
}

TEST_CASE("loading sweep moves frequency down and shedding up") {
  auto smooth = with_continuous_segments(fixture("ieee14.json"));
  auto island = only_island(smooth);

  std::vector<double> dfs, sheds;
  solver::WarmStart ws;
  bool have_ws = false;
  for (int i = 0; i <= 10; ++i) {
    double lf = 1.0 + 0.32 * i;
    auto scaled = net::scale_loading(smooth, lf);
    auto r = solver::solve_island(scaled, island, SolverOptions{},
                                  have_ws ? &ws : nullptr);
    CAPTURE(lf);
    REQUIRE(r.status == SolveStatus::converged);
    REQUIRE(r.feasible);
    dfs.push_back(r.delta_f);
    sheds.push_back(r.shed_p);
    ws = warm_from(r);
    have_ws = true;

    // Mid-sweep the curves hold partial shed; hand that shed pattern to the
    // conventional oracle and the voltage pictures must agree.
    if (i == 5) {
      std::map<int, double> keep;
      for (const auto& l : scaled.loads) {
        double shed = 0;
        for (int si = 0; si < static_cast<int>(l.segments.size()); ++si)
          shed += l.segments[si].fraction * r.seg_alpha.at({l.id, si});
        keep[l.id] = 1.0 - shed;
      }
      auto pf = pftest::solve_pf(scaled, keep);
      REQUIRE(pf.converged);
      for (const auto& [id, v] : r.bus_v) {
        auto ref = pf.v[scaled.bus_index(id)];
        CAPTURE(id);
        CHECK(std::abs(v.first - ref.real()) < 1e-5);
        CHECK(std::abs(v.second - ref.imag()) < 1e-5);
      }
      double p_slack = scaled.generators[0].p_set + r.gen_eff.at(1).second;
      CHECK(p_slack == doctest::Approx(pf.slack_p).epsilon(1e-5));
    }
  }

  for (size_t i = 1; i < dfs.size(); ++i) {
    CAPTURE(i);
    CHECK(dfs[i] <= dfs[i - 1] + 1e-9);
    CHECK(sheds[i] >= sheds[i - 1] - 1e-9);
  }
  CHECK(dfs.front() == doctest::Approx(-0.10797757447618016).epsilon(1e-9));
  CHECK(dfs.back() == doctest::Approx(-0.4890558578150193).epsilon(1e-9));
  CHECK(sheds.front() == 0.0);
  CHECK(sheds.back() == doctest::Approx(1.8492600000000004).epsilon(1e-9));
}

}  // TEST_SUITE
