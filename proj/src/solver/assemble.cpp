#include "solver/assemble.hpp"

#include <cmath>
#include <vector>

namespace cascsim::solver {

namespace {

// Below this squared voltage magnitude, constant-power current division is
// meaningless; the caller treats the state as numerically collapsed.
constexpr double kVmagGuard = 1e-12;

// Current drawn by a constant-PQ device at rectangular voltage, with first
// and second partials. Derived from I = conj(S/V):
//   iR = (P VR + Q VI) / W,  iI = (P VI - Q VR) / W,  W = VR^2 + VI^2.
struct PqCurrent {
  double iR, iI;
  double diR_dVR, diR_dVI, diI_dVR, diI_dVI;
  double diR_dP, diR_dQ, diI_dP, diI_dQ;
  double d2iR_VRVR, d2iR_VRVI, d2iR_VIVI;
  double d2iI_VRVR, d2iI_VRVI, d2iI_VIVI;
  double d2iR_VRP, d2iR_VIP, d2iR_VRQ, d2iR_VIQ;
  double d2iI_VRP, d2iI_VIP, d2iI_VRQ, d2iI_VIQ;
};

PqCurrent pq_current(double P, double Q, double VR, double VI) {
  PqCurrent c;
  double W = VR * VR + VI * VI;
  double W2 = W * W, W3 = W2 * W;
  double NR = P * VR + Q * VI;
  double NI = P * VI - Q * VR;
  c.iR = NR / W;
  c.iI = NI / W;
  c.diR_dVR = P / W - 2 * VR * NR / W2;
  c.diR_dVI = Q / W - 2 * VI * NR / W2;
  c.diI_dVR = -Q / W - 2 * VR * NI / W2;
  c.diI_dVI = P / W - 2 * VI * NI / W2;
  c.diR_dP = VR / W;
  c.diR_dQ = VI / W;
  c.diI_dP = VI / W;
  c.diI_dQ = -VR / W;
  c.d2iR_VRVR = -4 * VR * P / W2 - 2 * NR / W2 + 8 * VR * VR * NR / W3;
  c.d2iR_VRVI = -2 * VI * P / W2 - 2 * VR * Q / W2 + 8 * VR * VI * NR / W3;
  c.d2iR_VIVI = -4 * VI * Q / W2 - 2 * NR / W2 + 8 * VI * VI * NR / W3;
  c.d2iI_VRVR = 4 * VR * Q / W2 - 2 * NI / W2 + 8 * VR * VR * NI / W3;
  c.d2iI_VRVI = -2 * VR * P / W2 + 2 * VI * Q / W2 + 8 * VR * VI * NI / W3;
  c.d2iI_VIVI = -4 * VI * P / W2 - 2 * NI / W2 + 8 * VI * VI * NI / W3;
  c.d2iR_VRP = 1 / W - 2 * VR * VR / W2;
  c.d2iR_VIP = -2 * VR * VI / W2;
  c.d2iR_VRQ = -2 * VR * VI / W2;
  c.d2iR_VIQ = 1 / W - 2 * VI * VI / W2;
  c.d2iI_VRP = -2 * VR * VI / W2;
  c.d2iI_VIP = 1 / W - 2 * VI * VI / W2;
  c.d2iI_VRQ = -1 / W + 2 * VR * VR / W2;
  c.d2iI_VIQ = 2 * VR * VI / W2;
  return c;
}

struct Builder {
  const Layout& L;
  const Eigen::VectorXd& z;
  bool want_matrix;
  Assembly& out;
  std::vector<Eigen::Triplet<double>> J;  // (constraint, primal)
  std::vector<Eigen::Triplet<double>> H;  // (primal, primal), both halves

  double lam(int c) const { return z[L.LAMBDA(c)]; }

  void addJ(int c, int p, double v) { J.emplace_back(c, p, v); }
  void addH(int a, int b, double v) {
    if (!want_matrix || v == 0) return;
    H.emplace_back(a, b, v);
    if (a != b) H.emplace_back(b, a, v);
  }

  void branches() {
    const auto& net = L.net();
    for (int bid : L.island().branches) {
      const auto& br = net.branches[net.branch_index(bid)];
      double d = br.r * br.r + br.x * br.x;
      double g = br.r / d, b = -br.x / d;
      double t = br.tap, t2 = t * t;
      double yffg = g / t2, yffb = (b + br.b / 2) / t2;
      double yftg = -g / t, yftb = -b / t;
      double yttg = g, yttb = b + br.b / 2;
      int f = L.local_bus(br.from), to = L.local_bus(br.to);
      linear_current(f, f, yffg, yffb);
      linear_current(f, to, yftg, yftb);
      linear_current(to, f, yftg, yftb);
      linear_current(to, to, yttg, yttb);
    }
  }

  // I at bus `at` from admittance times V at bus `src`, into KCL rows.
  void linear_current(int at, int src, double yg, double yb) {
    int cr = L.C_KCL_R(at), ci = L.C_KCL_I(at);
    double vr = z[L.VR(src)], vi = z[L.VI(src)];
    out.F[cr] += yg * vr - yb * vi;
    out.F[ci] += yb * vr + yg * vi;
    addJ(cr, L.VR(src), yg);
    addJ(cr, L.VI(src), -yb);
    addJ(ci, L.VR(src), yb);
    addJ(ci, L.VI(src), yg);
  }

  void buses() {
    const auto& net = L.net();
    for (int i = 0; i < L.n_bus(); ++i) {
      const auto& bus = net.buses[net.bus_index(L.bus_ids()[i])];
      if (bus.gs != 0 || bus.bs != 0) linear_current(i, i, bus.gs, bus.bs);
      int cr = L.C_KCL_R(i), ci = L.C_KCL_I(i);
      out.F[cr] -= z[L.IFR(i)];
      out.F[ci] -= z[L.IFI(i)];
      addJ(cr, L.IFR(i), -1);
      addJ(ci, L.IFI(i), -1);
    }
  }

  // Shared PQ-current block: sign +1 for loads, -1 for generation. pP/pQ
  // are the primal indices P and Q depend on (-1 when constant), with
  // dP/d(pP) = wP (the chain factor, e.g. -p0 for shed segments).
  void pq_block(int lb, double P, double Q, double sign, int pP, double wP,
                int pQ, double wQ) {
    double vr = z[L.VR(lb)], vi = z[L.VI(lb)];
    if (vr * vr + vi * vi < kVmagGuard) {
      out.guard_tripped = true;
      return;
    }
    PqCurrent c = pq_current(P, Q, vr, vi);
    int cr = L.C_KCL_R(lb), ci = L.C_KCL_I(lb);
    out.F[cr] += sign * c.iR;
    out.F[ci] += sign * c.iI;
    int xr = L.VR(lb), xi = L.VI(lb);
    addJ(cr, xr, sign * c.diR_dVR);
    addJ(cr, xi, sign * c.diR_dVI);
    addJ(ci, xr, sign * c.diI_dVR);
    addJ(ci, xi, sign * c.diI_dVI);
    if (pP >= 0) {
      addJ(cr, pP, sign * wP * c.diR_dP);
      addJ(ci, pP, sign * wP * c.diI_dP);
    }
    if (pQ >= 0) {
      addJ(cr, pQ, sign * wQ * c.diR_dQ);
      addJ(ci, pQ, sign * wQ * c.diI_dQ);
    }
    if (!want_matrix) return;
    double lr = sign * lam(cr), li = sign * lam(ci);
    addH(xr, xr, lr * c.d2iR_VRVR + li * c.d2iI_VRVR);
    addH(xr, xi, lr * c.d2iR_VRVI + li * c.d2iI_VRVI);
    addH(xi, xi, lr * c.d2iR_VIVI + li * c.d2iI_VIVI);
    if (pP >= 0) {
      addH(xr, pP, wP * (lr * c.d2iR_VRP + li * c.d2iI_VRP));
      addH(xi, pP, wP * (lr * c.d2iR_VIP + li * c.d2iI_VIP));
    }
    if (pQ >= 0) {
      addH(xr, pQ, wQ * (lr * c.d2iR_VRQ + li * c.d2iI_VRQ));
      addH(xi, pQ, wQ * (lr * c.d2iR_VIQ + li * c.d2iI_VIQ));
    }
  }

  void loads() {
    for (const auto& fx : L.fixed_loads())
      pq_block(fx.lb, fx.p, fx.q, +1, -1, 0, -1, 0);
    for (const auto& seg : L.segments()) {
      double a = seg.pinned ? seg.pin_value : z[L.ALPHA(seg.var)];
      int pa = seg.pinned ? -1 : L.ALPHA(seg.var);
      pq_block(seg.lb, seg.p0 * (1 - a), seg.q0 * (1 - a), +1, pa, -seg.p0,
               pa, -seg.q0);
      if (!seg.pinned) alpha_constraint(seg);
    }
  }

  void alpha_constraint(const Layout::Seg& seg) {
    int c = L.C_ALPHA(seg.var);
    int pa = L.ALPHA(seg.var);
    addJ(c, pa, 1);
    if (seg.scheme == net::ShedScheme::ufls) {
      double u = z[L.DF()];
      auto A = seg.curve.eval(u);
      out.F[c] = z[pa] - A.value;
      addJ(c, L.DF(), -A.deriv);
      addH(L.DF(), L.DF(), -lam(c) * seg.curve.second_derivative(u));
    } else {
      double vr = z[L.VR(seg.lb)], vi = z[L.VI(seg.lb)];
      double W = vr * vr + vi * vi;
      if (W < kVmagGuard) {
        out.guard_tripped = true;
        return;
      }
      double u = std::sqrt(W);
      auto A = seg.curve.eval(u);
      double A2 = seg.curve.second_derivative(u);
      out.F[c] = z[pa] - A.value;
      int xr = L.VR(seg.lb), xi = L.VI(seg.lb);
      addJ(c, xr, -A.deriv * vr / u);
      addJ(c, xi, -A.deriv * vi / u);
      if (!want_matrix) return;
      double u3 = u * u * u, lc = lam(c);
      addH(xr, xr, -lc * (A2 * vr * vr / W + A.deriv * vi * vi / u3));
      addH(xr, xi, -lc * (A2 * vr * vi / W - A.deriv * vr * vi / u3));
      addH(xi, xi, -lc * (A2 * vi * vi / W + A.deriv * vr * vr / u3));
    }
  }

  void pv_gens() {
    for (int k = 0; k < L.n_pv(); ++k) {
      const auto& pv = L.pv_gens()[k];
      pq_block(pv.lb, pv.p_set + z[L.DPG(k)], z[L.QG(k)], -1, L.DPG(k), 1,
               L.QG(k), 1);
      int cm = L.C_MAG(k);
      double vr = z[L.VR(pv.lb)], vi = z[L.VI(pv.lb)];
      out.F[cm] = vr * vr + vi * vi - pv.v_set * pv.v_set;
      addJ(cm, L.VR(pv.lb), 2 * vr);
      addJ(cm, L.VI(pv.lb), 2 * vi);
      addH(L.VR(pv.lb), L.VR(pv.lb), 2 * lam(cm));
      addH(L.VI(pv.lb), L.VI(pv.lb), 2 * lam(cm));
      int cd = L.C_DROOP(k);
      double u = z[L.DF()];
      auto C = pv.clamp.eval(u);
      out.F[cd] = z[L.DPG(k)] - C.value;
      addJ(cd, L.DPG(k), 1);
      addJ(cd, L.DF(), -C.deriv);
      addH(L.DF(), L.DF(), -lam(cd) * pv.clamp.second_derivative(u));
    }
  }

  void ref_gen() {
    const auto& ref = L.ref_gen();
    int rb = ref.lb;
    int cr = L.C_KCL_R(rb), ci = L.C_KCL_I(rb);
    out.F[cr] -= z[L.ISR()];
    out.F[ci] -= z[L.ISI()];
    addJ(cr, L.ISR(), -1);
    addJ(ci, L.ISI(), -1);

    out.F[L.C_REF_VR()] = z[L.VR(rb)] - ref.v_set;
    addJ(L.C_REF_VR(), L.VR(rb), 1);
    out.F[L.C_REF_VI()] = z[L.VI(rb)];
    addJ(L.C_REF_VI(), L.VI(rb), 1);

    int cp = L.C_PWR_REF();
    double vr = z[L.VR(rb)], vi = z[L.VI(rb)];
    double isr = z[L.ISR()], isi = z[L.ISI()];
    out.F[cp] = ref.p_set + z[L.DPS()] - (vr * isr + vi * isi);
    addJ(cp, L.DPS(), 1);
    addJ(cp, L.VR(rb), -isr);
    addJ(cp, L.ISR(), -vr);
    addJ(cp, L.VI(rb), -isi);
    addJ(cp, L.ISI(), -vi);
    addH(L.VR(rb), L.ISR(), -lam(cp));
    addH(L.VI(rb), L.ISI(), -lam(cp));

    int cd = L.C_DROOP_REF();
    out.F[cd] = z[L.DPS()] + ref.gain * z[L.DF()];
    addJ(cd, L.DPS(), 1);
    addJ(cd, L.DF(), ref.gain);
  }

  void df_pin() {
    if (!L.df_pinned()) return;
    out.F[L.C_DF_PIN()] = z[L.DF()];
    addJ(L.C_DF_PIN(), L.DF(), 1);
  }

  void finish() {
    int NC = L.n_constraint(), NP = L.n_primal();
    // Stationarity: gradient of ||I_F||^2 plus J^T lambda.
    for (int i = 0; i < L.n_bus(); ++i) {
      out.F[NC + L.IFR(i)] += 2 * z[L.IFR(i)];
      out.F[NC + L.IFI(i)] += 2 * z[L.IFI(i)];
    }
    for (const auto& t : J)
      out.F[NC + t.col()] += t.value() * z[L.LAMBDA(t.row())];

    if (!want_matrix) return;
    std::vector<Eigen::Triplet<double>> K;
    K.reserve(2 * J.size() + H.size() + 2 * L.n_bus());
    for (const auto& t : J) {
      K.emplace_back(t.row(), t.col(), t.value());
      K.emplace_back(NC + t.col(), NP + t.row(), t.value());
    }
    for (const auto& t : H) K.emplace_back(NC + t.row(), t.col(), t.value());
    for (int i = 0; i < L.n_bus(); ++i) {
      K.emplace_back(NC + L.IFR(i), L.IFR(i), 2.0);
      K.emplace_back(NC + L.IFI(i), L.IFI(i), 2.0);
    }
    out.K.resize(NC + NP, NC + NP);
    out.K.setFromTriplets(K.begin(), K.end());
    out.K.makeCompressed();
  }
};

}  // namespace

void assemble(const Layout& L, const Eigen::VectorXd& z, bool want_matrix,
              Assembly& out) {
  out.F = Eigen::VectorXd::Zero(L.n_total());
  out.K.resize(0, 0);
  out.guard_tripped = false;
  Builder b{L, z, want_matrix, out};
  b.branches();
  b.buses();
  b.loads();
  b.pv_gens();
  b.ref_gen();
  b.df_pin();
  b.finish();
}

}  // namespace cascsim::solver
