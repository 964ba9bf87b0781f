#include "vortexlab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "json.hpp"
#include "vortexlab/error.hpp"

namespace vortexlab::solver {

namespace {

double dot(const RVec& a, const RVec& b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double sup_norm(const RVec& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double sup_norm(const CVec& v) {
  double m = 0;
  for (const auto& z : v) m = std::max(m, std::abs(z));
  return m;
}

// l2 with the flat area element
double l2_norm(const RVec& v, double area) { return std::sqrt(dot(v, v) * area); }

}  // namespace

void validate(const SolveConfig& c) {
  if (!(c.newton_tol > 0)) throw InvalidArgument("solve: newton_tol must be > 0");
  if (!(c.cg_tol > 0)) throw InvalidArgument("solve: cg_tol must be > 0");
  if (c.max_newton < 1) throw InvalidArgument("solve: max_newton must be >= 1");
  if (c.max_cg < 1) throw InvalidArgument("solve: max_cg must be >= 1");
  if (!(c.sleeve_width > 0)) throw InvalidArgument("solve: sleeve_width must be > 0");
  if (!(c.pad >= 0)) throw InvalidArgument("solve: pad must be >= 0");
  if (!(c.inner_tol > 0)) throw InvalidArgument("solve: inner_tol must be > 0");
  if (c.defect_probes < 1) throw InvalidArgument("solve: defect_probes must be >= 1");
}

std::string to_json(const SolveReport& r) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["converged"] = r.converged;
  j["newton_iterations"] = r.newton_iterations;
  j["residual_l2"] = r.residual_l2;
  j["residual_sup"] = r.residual_sup;
  j["cg_iterations"] = r.cg_iterations;
  j["step_lengths"] = r.step_lengths;
  j["final_energy"] = r.final_energy;
  j["xi_l2"] = r.xi_l2;
  j["xi_sup"] = r.xi_sup;
  j["dbar_sup_initial"] = r.dbar_sup_initial;
  j["dbar_sup_final"] = r.dbar_sup_final;
  j["preconditioner"] = r.preconditioner;
  j["defects"] = r.defects;
  j["note"] = r.note;
  return j.dump(2);
}

RVec moment_functional(const GaugedField& f, const RVec& xi) {
  return fields::vortex_residual(fields::apply_complex_gauge(f, xi));
}

RVec linearized_apply(const GaugedField& f, const RVec& xi) {
  Jacobian J(f);
  if (static_cast<int>(xi.size()) != J.size()) throw InvalidArgument("linearized_apply: wrong size");
  RVec y;
  J.apply(xi, y);
  return y;
}

Jacobian::Jacobian(const GaugedField& f)
    : mesh_(f.mesh), topo_(fields::make_topology(f.mesh)), n_cells_(topo_.n_cells), k_(f.k()) {
  ir2_ = 1.0 / (mesh_.h_r * mesh_.h_r);
  const double ht = mesh_.h_theta();
  it2_ = 1.0 / (ht * ht);
  L_.assign(static_cast<size_t>(topo_.n_sites) * k_ * k_, 0.0);
  for (int s = 0; s < topo_.n_sites; ++s) {
    int row = s / mesh_.n_theta;
    if (!mesh_.closed && (row == 0 || row == mesh_.n_r - 1)) continue;  // xi-bar vanishes there
    target::L_operator(f.target, f.u_at(s), &L_[static_cast<size_t>(s) * k_ * k_]);
  }
  bar_.assign(static_cast<size_t>(topo_.n_sites) * k_, 0.0);
}

void Jacobian::apply_laplacian(const RVec& x, RVec& y) const {
  const int k = k_;
  y.assign(x.size(), 0.0);
  const auto& t = topo_;
  for (int c = 0; c < n_cells_; ++c) {
    int up = t.cell_up[c], dn = t.cell_down[c], rt = t.cell_right[c], lt = t.cell_left[c];
    for (int a = 0; a < k; ++a) {
      double xc = x[static_cast<size_t>(c) * k + a];
      double xu = up >= 0 ? x[static_cast<size_t>(up) * k + a] : -xc;
      double xd = dn >= 0 ? x[static_cast<size_t>(dn) * k + a] : -xc;
      double xr = x[static_cast<size_t>(rt) * k + a], xl = x[static_cast<size_t>(lt) * k + a];
      y[static_cast<size_t>(c) * k + a] = ir2_ * (2 * xc - xu - xd) + it2_ * (2 * xc - xr - xl);
    }
  }
}

void Jacobian::apply(const RVec& x, RVec& y) const {
  apply_laplacian(x, y);
  const int k = k_;
  const auto& t = topo_;
  // bar = L * (site average of x), then y += corner average of bar
  for (int s = 0; s < t.n_sites; ++s) {
    const double* Ls = &L_[static_cast<size_t>(s) * k * k];
    double* b = &bar_[static_cast<size_t>(s) * k];
    bool zero = true;
    for (int q = 0; q < k * k; ++q)
      if (Ls[q] != 0) zero = false;
    if (zero) {
      for (int a = 0; a < k; ++a) b[a] = 0;
      continue;
    }
    double avg[2] = {0, 0};
    for (int a = 0; a < k; ++a) {
      double acc = 0;
      for (int q = 0; q < 4; ++q) acc += x[static_cast<size_t>(t.around[q][s]) * k + a];
      avg[a] = 0.25 * acc;
    }
    for (int a = 0; a < k; ++a) {
      double acc = 0;
      for (int b2 = 0; b2 < k; ++b2) acc += Ls[a * k + b2] * avg[b2];
      b[a] = acc;
    }
  }
  for (int c = 0; c < n_cells_; ++c) {
    int s01 = t.corner01[c], s10 = t.corner10[c], s11 = t.corner11[c];
    for (int a = 0; a < k; ++a)
      y[static_cast<size_t>(c) * k + a] +=
          0.25 * (bar_[static_cast<size_t>(c) * k + a] + bar_[static_cast<size_t>(s01) * k + a] +
                  bar_[static_cast<size_t>(s10) * k + a] + bar_[static_cast<size_t>(s11) * k + a]);
  }
}

LinearMap Jacobian::as_map() const {
  return [this](const RVec& x, RVec& y) { apply(x, y); };
}

CgResult conjugate_gradient(const LinearMap& A, const RVec& b, double tol, int max_iter, const LinearMap* M) {
  CgResult res;
  const size_t n = b.size();
  res.x.assign(n, 0.0);
  double bnorm = std::sqrt(dot(b, b));
  if (bnorm == 0) return res;
  RVec r = b, z, p, Ap(n), r_old;
  if (M) {
    (*M)(r, z);
  } else {
    z = r;
  }
  p = z;
  double rz = dot(r, z);
  for (int it = 1; it <= max_iter; ++it) {
    A(p, Ap);
    double pAp = dot(p, Ap);
    if (!(pAp > 0)) throw NumericalError("cg: loss of positivity (<Ap,p> <= 0), operator is not SPD");
    double alpha = rz / pAp;
    if (M) r_old = r;
    for (size_t i = 0; i < n; ++i) {
      res.x[i] += alpha * p[i];
      r[i] -= alpha * Ap[i];
    }
    double rn = std::sqrt(dot(r, r));
    res.iterations = it;
    res.relative_residual = rn / bnorm;
    if (!std::isfinite(rn)) throw NumericalError("cg: non-finite residual");
    if (res.relative_residual <= tol) return res;
    double beta;
    if (M) {
      (*M)(r, z);
      double rz_new = dot(r, z);
      double num = rz_new;
      for (size_t i = 0; i < n; ++i) num -= z[i] * r_old[i];
      beta = num / rz;
      rz = rz_new;
    } else {
      double rz_new = rn * rn;
      beta = rz_new / rz;
      rz = rz_new;
      z = r;
    }
    for (size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw NumericalError("cg: max_cg (" + std::to_string(max_iter) + ") exceeded, relative residual " +
                       std::to_string(res.relative_residual));
}

CgResult cg_solve(const GaugedField& f, const RVec& rhs, const SolveConfig& cfg) {
  validate(cfg);
  Jacobian J(f);
  if (static_cast<int>(rhs.size()) != J.size()) throw InvalidArgument("cg_solve: wrong rhs size");
  return conjugate_gradient(J.as_map(), rhs, cfg.cg_tol, cfg.max_cg);
}

SolveResult newton_solve(const GaugedField& f, const SolveConfig& cfg, const surface::CoreSleeve* cover) {
  validate(cfg);
  fields::check_finite(f);
  if (cfg.preconditioner == Preconditioner::patched && !cover)
    throw InvalidArgument("newton_solve: patched preconditioner needs a core/sleeve cover");
  bool any = false;
  for (const auto& z : f.u)
    if (z != Complex(0, 0)) any = true;
  bool tau_zero = true;
  for (double x : f.target.tau)
    if (x != 0) tau_zero = false;
  if (!any && !tau_zero) throw PreconditionError("newton_solve: unstable seed, u vanishes identically");
  if (!f.mesh.closed) {
    for (int row : {0, f.mesh.n_r - 1}) {
      CVec v = fields::ring_average(f, row);
      if (target::destabilizing_direction(f.target, v, 1e-8))
        throw PreconditionError("newton_solve: unstable seed, end ring at r=" + std::to_string(f.mesh.r(row)) +
                                " is not semistable");
    }
  }

  const double area = f.mesh.h_r * f.mesh.h_theta();
  SolveResult out;
  out.field = f;
  out.xi.assign(static_cast<size_t>(f.mesh.cells()) * f.k(), 0.0);
  SolveReport& rep = out.report;
  rep.preconditioner = cfg.preconditioner == Preconditioner::patched ? "patched" : "none";
  rep.dbar_sup_initial = sup_norm(fields::dbar_residual(f));

  RVec R = fields::vortex_residual(out.field);
  double rl2 = l2_norm(R, area);
  for (int it = 0;; ++it) {
    rep.residual_l2.push_back(rl2);
    rep.residual_sup.push_back(sup_norm(R));
    if (rep.residual_sup.back() <= cfg.newton_tol) {
      rep.converged = true;
      break;
    }
    if (it == cfg.max_newton) break;
    rep.newton_iterations = it + 1;

    Jacobian J(out.field);
    RVec rhs(R.size());
    for (size_t i = 0; i < R.size(); ++i) rhs[i] = -R[i];
    CgResult cg;
    std::unique_ptr<PatchedPreconditioner> P;
    if (cfg.preconditioner == Preconditioner::patched) {
      P = std::make_unique<PatchedPreconditioner>(out.field, *cover, cfg.pad, cfg.inner_tol);
      double d = P->measure_defect(J, cfg.defect_probes, cfg.seed + static_cast<std::uint64_t>(it));
      rep.defects.push_back(d);
      if (!(d < 1)) {
        P.reset();
        rep.note = "patched preconditioner defect >= 1, fell back to plain CG";
      }
    }
    if (P) {
      LinearMap m = P->as_map();
      cg = conjugate_gradient(J.as_map(), rhs, cfg.cg_tol, cfg.max_cg, &m);
    } else {
      cg = conjugate_gradient(J.as_map(), rhs, cfg.cg_tol, cfg.max_cg);
    }
    rep.cg_iterations.push_back(cg.iterations);

    double t = 1.0;
    GaugedField trial;
    RVec Rt;
    double tl2 = 0;
    int halvings = 0;
    for (;;) {
      RVec step(cg.x.size());
      for (size_t i = 0; i < step.size(); ++i) step[i] = t * cg.x[i];
      trial = fields::apply_complex_gauge(out.field, step);
      Rt = fields::vortex_residual(trial);
      tl2 = l2_norm(Rt, area);
      if (!cfg.damping || (std::isfinite(tl2) && tl2 < rl2)) break;
      if (++halvings > 20)
        throw NumericalError("newton_solve: line search failed 20 times (divergence, unstable seed?)");
      t *= 0.5;
    }
    fields::check_finite(trial);
    for (size_t i = 0; i < out.xi.size(); ++i) out.xi[i] += t * cg.x[i];
    rep.step_lengths.push_back(t);
    out.field = std::move(trial);
    R = std::move(Rt);
    rl2 = tl2;
  }
  rep.final_energy = fields::energy(out.field).total;
  rep.xi_l2 = l2_norm(out.xi, area);
  rep.xi_sup = sup_norm(out.xi);
  rep.dbar_sup_final = sup_norm(fields::dbar_residual(out.field));
  return out;
}

}  // namespace vortexlab::solver
