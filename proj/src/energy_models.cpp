#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "lojalab/energy_models.hpp"

namespace lojalab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct EdgeDensity {
  double F = 0, Fm = 0, FD = 0, Fmm = 0, FmD = 0, FDD = 0;
};

struct NodePotential {
  double W = 0, dW = 0, d2W = 0;
};

// Energies of the form
//   h * sum_edges F(m_e, D_e) + h * trapezoid_nodes W(u)
// with m_e the edge average and D_e the forward difference; both boundary
// edges are included through zero ghost values.
class EdgeNodeEnergy : public EnergyModel {
 public:
  explicit EdgeNodeEnergy(const Grid1D& grid) : grid_(grid) {}

  const Grid1D& grid() const override { return grid_; }

  double energy(const Field& u) const override {
    check(u);
    const std::size_t n = grid_.n();
    const double h = grid_.h();
    double edges = 0.0;
    for (std::size_t e = 0; e <= n; ++e) edges += edge(e, u).F;
    double nodes = 0.0;
    if (has_potential()) {
      for (std::size_t i = 0; i < n; ++i) nodes += potential(u[i]).W;
      nodes += potential(0.0).W;  // two boundary half-weights
    }
    return h * (edges + nodes);
  }

  Field h_gradient(const Field& u) const override {
    check(u);
    const std::size_t n = grid_.n();
    const double h = grid_.h();
    std::vector<EdgeDensity> d(n + 1);
    for (std::size_t e = 0; e <= n; ++e) d[e] = edge(e, u);
    Field g(grid_);
    for (std::size_t i = 0; i < n; ++i) {
      g[i] = 0.5 * (d[i].Fm + d[i + 1].Fm) - (d[i + 1].FD - d[i].FD) / h;
      if (has_potential()) g[i] += potential(u[i]).dW;
    }
    return g;
  }

  Field hessian_apply(const Field& u, const Field& v) const override {
    check(u);
    require_same_grid(u, v);
    const std::size_t n = grid_.n();
    const double h = grid_.h();
    std::vector<double> dFm(n + 1);
    std::vector<double> dFD(n + 1);
    for (std::size_t e = 0; e <= n; ++e) {
      const EdgeDensity d = edge(e, u);
      const double vl = e > 0 ? v[e - 1] : 0.0;
      const double vr = e < n ? v[e] : 0.0;
      const double dm = 0.5 * (vl + vr);
      const double dD = (vr - vl) / h;
      dFm[e] = d.Fmm * dm + d.FmD * dD;
      dFD[e] = d.FmD * dm + d.FDD * dD;
    }
    Field hv(grid_);
    for (std::size_t i = 0; i < n; ++i) {
      hv[i] = 0.5 * (dFm[i] + dFm[i + 1]) - (dFD[i + 1] - dFD[i]) / h;
      if (has_potential()) hv[i] += potential(u[i]).d2W * v[i];
    }
    return hv;
  }

 protected:
  virtual EdgeDensity density(double m, double D) const = 0;
  virtual bool has_potential() const { return false; }
  virtual NodePotential potential(double /*s*/) const { return {}; }
  virtual void check_domain(const Field& /*u*/) const {}

 private:
  void check(const Field& u) const {
    require(u.grid() == grid_, name() + ": field is on a different grid");
    check_domain(u);
  }

  EdgeDensity edge(std::size_t e, const Field& u) const {
    const std::size_t n = grid_.n();
    const double ul = e > 0 ? u[e - 1] : 0.0;
    const double ur = e < n ? u[e] : 0.0;
    return density(0.5 * (ul + ur), (ur - ul) / grid_.h());
  }

  Grid1D grid_;
};

class RevolutionEnergy final : public EdgeNodeEnergy {
 public:
  using EdgeNodeEnergy::EdgeNodeEnergy;

  std::string name() const override { return "revolution"; }

  bool admissible(const Field& u) const override {
    // boundary values are 0, so 1+u = 1 > 0 there
    return std::all_of(u.values().begin(), u.values().end(), [](double x) { return 1.0 + x > 0.0; });
  }

  double stiffness(const Field& u) const override {
    double top = 1.0;
    for (double x : u.values()) top = std::max(top, 1.0 + x);
    return kTwoPi * top;
  }

 protected:
  EdgeDensity density(double m, double D) const override {
    const double s = std::sqrt(1.0 + D * D);
    const double r = 1.0 + m;
    return {kTwoPi * r * s, kTwoPi * s, kTwoPi * r * D / s, 0.0, kTwoPi * D / s,
            kTwoPi * r / (s * s * s)};
  }

  void check_domain(const Field& u) const override {
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (!(1.0 + u[i] > 0.0)) {
        std::ostringstream msg;
        msg << "revolution energy needs 1+u > 0; node " << i << " (x=" << u.grid().node(i)
            << ") has 1+u = " << 1.0 + u[i];
        fail(ErrorKind::domain_error, msg.str());
      }
    }
  }
};

class GraphAreaEnergy final : public EdgeNodeEnergy {
 public:
  using EdgeNodeEnergy::EdgeNodeEnergy;

  std::string name() const override { return "graph_area"; }
  double stiffness(const Field&) const override { return 1.0; }

 protected:
  EdgeDensity density(double, double D) const override {
    const double s = std::sqrt(1.0 + D * D);
    return {s, 0.0, D / s, 0.0, 0.0, 1.0 / (s * s * s)};
  }
};

class AllenCahnEnergy final : public EdgeNodeEnergy {
 public:
  using EdgeNodeEnergy::EdgeNodeEnergy;

  std::string name() const override { return "allen_cahn"; }
  double stiffness(const Field&) const override { return 1.0; }

 protected:
  EdgeDensity density(double, double D) const override { return {0.5 * D * D, 0.0, D, 0.0, 0.0, 1.0}; }
  bool has_potential() const override { return true; }
  NodePotential potential(double s) const override {
    const double w = 1.0 - s * s;
    return {0.25 * w * w, s * s * s - s, 3.0 * s * s - 1.0};
  }
};

}  // namespace

EnergyPtr revolution_model(const Grid1D& grid) { return std::make_shared<RevolutionEnergy>(grid); }
EnergyPtr graph_area_model(const Grid1D& grid) { return std::make_shared<GraphAreaEnergy>(grid); }
EnergyPtr allen_cahn_model(const Grid1D& grid) { return std::make_shared<AllenCahnEnergy>(grid); }

double revolution_multiplier_closed_form(const Field& u, double nu) {
  require(nu != 0.0, "closed-form multiplier needs nu != 0");
  const Grid1D& g = u.grid();
  const std::size_t n = g.n();
  const double h = g.h();
  const double pi = std::numbers::pi;
  auto slope_ratio = [&](std::size_t e) {
    const double ul = e > 0 ? u[e - 1] : 0.0;
    const double ur = e < n ? u[e] : 0.0;
    const double D = (ur - ul) / h;
    return D / std::sqrt(1.0 + D * D);
  };
  double weighted = 0.0;
  for (std::size_t e = 0; e <= n; ++e) {
    const double ul = e > 0 ? u[e - 1] : 0.0;
    const double ur = e < n ? u[e] : 0.0;
    const double D = (ur - ul) / h;
    weighted += (1.0 + 0.5 * (ul + ur)) / std::sqrt(1.0 + D * D);
  }
  weighted *= h;
  const double area = revolution_model(g)->energy(u);
  const double boundary = slope_ratio(n) - slope_ratio(0);
  return area / nu - (pi / nu) * boundary - (pi / nu) * weighted;
}

}  // namespace lojalab
