#include <cmath>
#include <random>

#include "vortexlab/error.hpp"
#include "vortexlab/solver.hpp"

namespace vortexlab::solver {

PatchedPreconditioner::PatchedPreconditioner(const GaugedField& f, const surface::CoreSleeve& cover, double pad,
                                             double inner_tol, int inner_max)
    : k_(f.k()), n_global_(f.mesh.cells()), inner_tol_(inner_tol), inner_max_(inner_max) {
  const auto& m = f.mesh;
  if (cover.lattice != surface::Lattice::cells || cover.n_rows != m.cell_rows() || cover.n_theta != m.n_theta)
    throw InvalidArgument("patched preconditioner: cover does not match the cell rows of the field");
  const fields::Topology topo = fields::make_topology(m);
  const int nt = m.n_theta;
  const int pad_rows = static_cast<int>(std::ceil(pad / m.h_r - 1e-9));

  for (const auto& pc : cover.pieces) {
    int b = pc.row_begin - pad_rows;
    int e = pc.row_begin + pc.row_count - 1 + pad_rows;
    if (!m.closed) {
      b = std::max(b, 0);
      e = std::min(e, m.cell_rows() - 1);
    }
    const int rows = e - b + 1;
    // The strip is lifted: each local row is one global ring, walked upward from row b.
    surface::ComponentMesh lm;
    lm.vertex = pc.vertex;
    lm.n_r = rows + 1;
    lm.n_theta = nt;
    lm.h_r = m.h_r;
    lm.r_min = 0;
    GaugedField lf = fields::zero_field(lm, f.target);
    std::vector<int> gsite(static_cast<size_t>(lm.sites()));
    for (int j = 0; j < nt; ++j) {
      int s = cover.wrap(b) * nt + j;
      for (int q = 0; q <= rows; ++q) {
        if (s < 0) throw InvalidArgument("patched preconditioner: strip leaves the mesh");
        gsite[static_cast<size_t>(q * nt + j)] = s;
        s = topo.site_up[static_cast<size_t>(s)];
      }
    }
    const int n = f.n();
    for (int ls = 0; ls < lm.sites(); ++ls)
      for (int q = 0; q < n; ++q) lf.u_at(ls)[q] = f.u_at(gsite[static_cast<size_t>(ls)])[q];

    LocalPiece piece;
    piece.cells.resize(static_cast<size_t>(rows * nt));
    piece.weight.resize(static_cast<size_t>(rows * nt));
    for (int q = 0; q < rows; ++q) {
      int pr = b + q - pc.row_begin;
      double w = (pr >= 0 && pr < pc.row_count) ? pc.weight[static_cast<size_t>(pr)] : 0.0;
      for (int j = 0; j < nt; ++j) {
        piece.cells[static_cast<size_t>(q * nt + j)] = gsite[static_cast<size_t>(q * nt + j)];
        piece.weight[static_cast<size_t>(q * nt + j)] = w;
      }
    }
    piece.J = std::make_unique<Jacobian>(lf);
    pieces_.push_back(std::move(piece));
  }
}

void PatchedPreconditioner::apply(const RVec& eta, RVec& out) const {
  const int k = k_;
  out.assign(static_cast<size_t>(n_global_) * k, 0.0);
  for (const auto& p : pieces_) {
    RVec local(p.cells.size() * k);
    for (size_t c = 0; c < p.cells.size(); ++c)
      for (int a = 0; a < k; ++a) local[c * k + a] = eta[static_cast<size_t>(p.cells[c]) * k + a];
    CgResult r = conjugate_gradient(p.J->as_map(), local, inner_tol_, inner_max_);
    inner_iterations_ += r.iterations;
    if (r.x.empty()) continue;
    for (size_t c = 0; c < p.cells.size(); ++c) {
      if (p.weight[c] == 0) continue;
      for (int a = 0; a < k; ++a) out[static_cast<size_t>(p.cells[c]) * k + a] += p.weight[c] * r.x[c * k + a];
    }
  }
}

LinearMap PatchedPreconditioner::as_map() const {
  return [this](const RVec& x, RVec& y) { apply(x, y); };
}

double PatchedPreconditioner::defect(const Jacobian& J, const RVec& eta) const {
  RVec q, jq;
  apply(eta, q);
  J.apply(q, jq);
  double num = 0, den = 0;
  for (size_t i = 0; i < eta.size(); ++i) {
    num += (jq[i] - eta[i]) * (jq[i] - eta[i]);
    den += eta[i] * eta[i];
  }
  return den > 0 ? std::sqrt(num / den) : 0.0;
}

double PatchedPreconditioner::measure_defect(const Jacobian& J, int probes, std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  double worst = 0;
  for (int p = 0; p < probes; ++p) {
    RVec eta(static_cast<size_t>(J.size()));
    for (auto& x : eta) x = nd(rng);
    worst = std::max(worst, defect(J, eta));
  }
  return worst;
}

}  // namespace vortexlab::solver
