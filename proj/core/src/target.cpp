#include "vortexlab/target.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "vortexlab/error.hpp"

namespace vortexlab::target {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Gaussian elimination with partial pivoting, A is k x k row-major.
bool solve_small(RVec a, RVec b, int k, RVec& x) {
  for (int c = 0; c < k; ++c) {
    int p = c;
    for (int r = c + 1; r < k; ++r)
      if (std::abs(a[r * k + c]) > std::abs(a[p * k + c])) p = r;
    if (std::abs(a[p * k + c]) < 1e-300) return false;
    if (p != c) {
      for (int j = 0; j < k; ++j) std::swap(a[c * k + j], a[p * k + j]);
      std::swap(b[c], b[p]);
    }
    for (int r = c + 1; r < k; ++r) {
      double f = a[r * k + c] / a[c * k + c];
      for (int j = c; j < k; ++j) a[r * k + j] -= f * a[c * k + j];
      b[r] -= f * b[c];
    }
  }
  x.assign(k, 0.0);
  for (int r = k - 1; r >= 0; --r) {
    double s = b[r];
    for (int j = r + 1; j < k; ++j) s -= a[r * k + j] * x[j];
    x[r] = s / a[r * k + r];
  }
  return true;
}

std::string fmt_vec(const std::vector<double>& v) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  os << ")";
  return os.str();
}

long gcd_abs(long a, long b) { return std::gcd(std::labs(a), std::labs(b)); }

double max_abs(const RVec& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TargetSpace make_target(int n, int k, std::vector<int> weights, RVec tau) {
  TargetSpace t;
  t.n = n;
  t.k = k;
  t.weights = std::move(weights);
  t.tau = std::move(tau);
  validate(t);
  return t;
}

void validate(const TargetSpace& t) {
  if (t.n < 1) throw InvalidArgument("target: n must be >= 1");
  if (t.k < 1 || t.k > 2) throw InvalidArgument("target: torus rank k must be 1 or 2");
  if (static_cast<int>(t.weights.size()) != t.n * t.k)
    throw InvalidArgument("target: weight matrix must be k x n");
  if (static_cast<int>(t.tau.size()) != t.k) throw InvalidArgument("target: tau must have k entries");
  for (double x : t.tau)
    if (!std::isfinite(x)) throw InvalidArgument("target: tau must be finite");
}

void moment_map(const TargetSpace& t, const Complex* v, double* out) {
  for (int a = 0; a < t.k; ++a) {
    double acc = 0;
    for (int j = 0; j < t.n; ++j) acc += t.w(a, j) * std::norm(v[j]);
    out[a] = 0.5 * acc - t.tau[a];
  }
}

RVec moment_map(const TargetSpace& t, const CVec& v) {
  RVec out(t.k);
  moment_map(t, v.data(), out.data());
  return out;
}

CVec infinitesimal_action(const TargetSpace& t, const RVec& xi, const CVec& v) {
  CVec out(t.n);
  for (int j = 0; j < t.n; ++j) out[j] = Complex(0, t.pair(xi.data(), j)) * v[j];
  return out;
}

void L_operator(const TargetSpace& t, const Complex* v, double* out) {
  for (int a = 0; a < t.k; ++a)
    for (int b = 0; b < t.k; ++b) {
      double acc = 0;
      for (int j = 0; j < t.n; ++j) acc += t.w(a, j) * t.w(b, j) * std::norm(v[j]);
      out[a * t.k + b] = acc;
    }
}

RVec L_operator(const TargetSpace& t, const CVec& v) {
  RVec out(static_cast<size_t>(t.k * t.k));
  L_operator(t, v.data(), out.data());
  return out;
}

namespace {

// Hilbert-Mumford: v is semistable iff <tau, lambda> >= 0 for every lambda
// with (w^T lambda)_j >= 0 on the support of v. The cone of such lambda is
// generated by the candidates below (k <= 2).
std::optional<RVec> hm_test(const TargetSpace& t, const std::vector<int>& support, double tol) {
  std::vector<RVec> cands;
  if (t.k == 1) {
    cands = {{1.0}, {-1.0}};
  } else {
    cands = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (int j : support) {
      double a = t.w(0, j), b = t.w(1, j);
      cands.push_back({a, b});
      cands.push_back({-a, -b});
      cands.push_back({-b, a});
      cands.push_back({b, -a});
    }
  }
  for (const auto& lam : cands) {
    if (max_abs(lam) == 0) continue;
    bool limit_exists = true;
    for (int j : support)
      if (t.pair(lam.data(), j) < 0) limit_exists = false;
    if (!limit_exists) continue;
    double pairing = 0, norm = 0;
    for (int a = 0; a < t.k; ++a) {
      pairing += t.tau[a] * lam[a];
      norm += lam[a] * lam[a];
    }
    if (pairing < -tol * std::sqrt(norm)) return lam;
  }
  return std::nullopt;
}

std::vector<int> support_of(const CVec& v, double rel_tol) {
  double m = 0;
  for (const auto& x : v) m = std::max(m, std::abs(x));
  std::vector<int> s;
  for (size_t j = 0; j < v.size(); ++j)
    if (std::abs(v[j]) > rel_tol * m && std::abs(v[j]) > 0) s.push_back(static_cast<int>(j));
  return s;
}

}  // namespace

std::optional<std::vector<double>> destabilizing_direction(const TargetSpace& t, const CVec& v,
                                                           double support_tol) {
  return hm_test(t, support_of(v, support_tol), 1e-14);
}

bool is_semistable(const TargetSpace& t, const CVec& v) {
  return !destabilizing_direction(t, v, 0.0).has_value();
}

std::optional<std::string> chamber_problem(const TargetSpace& t) {
  CVec generic(t.n, Complex(1, 0));
  if (auto lam = destabilizing_direction(t, generic, 0.0))
    return "tau=" + fmt_vec(t.tau) + " lies outside the weight cone: direction lambda=" +
           fmt_vec(*lam) + " has <tau,lambda> < 0 with a limit for every point";
  if (t.k == 1) {
    if (t.tau[0] == 0) return "tau=(0) lies on a wall: direction lambda=(1) has <tau,lambda> = 0";
  } else {
    for (int j = 0; j < t.n; ++j) {
      double a = t.w(0, j), b = t.w(1, j);
      double cross = a * t.tau[1] - b * t.tau[0];
      double dot = a * t.tau[0] + b * t.tau[1];
      if (std::abs(cross) < 1e-12 && dot >= 0)
        return "tau=" + fmt_vec(t.tau) + " lies on the wall spanned by weight " + std::to_string(j) +
               ": direction lambda=" + fmt_vec({-b, a}) + " has <tau,lambda> = 0";
    }
  }
  return std::nullopt;
}

std::optional<std::string> free_action_problem(const TargetSpace& t, std::mt19937_64& rng,
                                               int samples) {
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int s = 0; s < samples; ++s) {
    CVec v(t.n);
    for (auto& x : v) x = Complex(nd(rng), nd(rng));
    // also probe coordinate subsets: knock out a random coordinate half the time
    if (s % 2 == 1 && t.n > 1) v[static_cast<size_t>(s / 2) % t.n] = 0;
    if (!is_semistable(t, v)) continue;
    KPoint kp;
    try {
      kp = kempf_ness(t, v);
    } catch (const Error&) {
      return "Kempf-Ness retraction failed at a sampled semistable point";
    }
    auto sup = support_of(kp.point, 1e-8);
    long g = 0;
    if (t.k == 1) {
      for (int j : sup) g = gcd_abs(g, t.w(0, j));
    } else {
      for (size_t p = 0; p < sup.size(); ++p)
        for (size_t q = p + 1; q < sup.size(); ++q) {
          long det = static_cast<long>(t.w(0, sup[p])) * t.w(1, sup[q]) -
                     static_cast<long>(t.w(0, sup[q])) * t.w(1, sup[p]);
          g = gcd_abs(g, det);
        }
    }
    if (g != 1)
      return "torus does not act freely on the zero level (support minors have gcd " +
             std::to_string(g) + ")";
  }
  return std::nullopt;
}

KPoint kempf_ness(const TargetSpace& t, const CVec& v, double tol, int max_iter) {
  if (static_cast<int>(v.size()) != t.n) throw InvalidArgument("kempf_ness: dimension mismatch");
  if (!is_semistable(t, v)) throw PreconditionError("kempf_ness: point is not semistable");
  const int k = t.k, n = t.n;
  RVec mod2(n);
  for (int j = 0; j < n; ++j) mod2[j] = std::norm(v[j]);

  auto scaled = [&](const RVec& s, RVec& m) {
    m.resize(n);
    for (int j = 0; j < n; ++j) m[j] = mod2[j] * std::exp(2 * t.pair(s.data(), j));
  };
  auto phi_of = [&](const RVec& m) {
    RVec phi(k);
    for (int a = 0; a < k; ++a) {
      double acc = 0;
      for (int j = 0; j < n; ++j) acc += t.w(a, j) * m[j];
      phi[a] = 0.5 * acc - t.tau[a];
    }
    return phi;
  };
  auto hess_of = [&](const RVec& m) {
    RVec h(static_cast<size_t>(k * k), 0.0);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b)
        for (int j = 0; j < n; ++j) h[a * k + b] += t.w(a, j) * t.w(b, j) * m[j];
    return h;
  };

  bool log_form = true;
  for (int w : t.weights) log_form = log_form && w >= 0;
  for (double x : t.tau) log_form = log_form && x > 0;

  RVec s(k, 0.0), m;
  if (log_form) {
    // start from the tropical solution of each row taken alone
    for (int a = 0; a < k; ++a) {
      double best = std::numeric_limits<double>::infinity();
      for (int j = 0; j < n; ++j) {
        if (t.w(a, j) <= 0 || mod2[j] == 0) continue;
        double sj = (std::log(2 * t.tau[a]) - std::log(t.w(a, j) * mod2[j])) / (2.0 * t.w(a, j));
        best = std::min(best, sj);
      }
      s[a] = std::isfinite(best) ? best : 0.0;
    }
    if (k > 1) {
      // the rows interact through shared coordinates: halve the guess
      bool shared = false;
      for (int j = 0; j < n; ++j) shared = shared || (t.w(0, j) > 0 && t.w(1, j) > 0);
      if (shared)
        for (auto& x : s) x *= 0.5;
    }
  }

  auto residual = [&](const RVec& ss, RVec& g) {
    RVec mm;
    scaled(ss, mm);
    g = phi_of(mm);
    return max_abs(g);
  };
  auto objective = [&](const RVec& ss) {
    RVec mm;
    scaled(ss, mm);
    double f = 0;
    for (int j = 0; j < n; ++j) f += 0.25 * mm[j];
    for (int a = 0; a < k; ++a) f -= t.tau[a] * ss[a];
    return f;
  };
  auto log_residual = [&](const RVec& ss, RVec& g) {
    RVec mm;
    scaled(ss, mm);
    g.assign(k, 0.0);
    double worst = 0;
    for (int a = 0; a < k; ++a) {
      double sa = 0;
      for (int j = 0; j < n; ++j) sa += t.w(a, j) * mm[j];
      g[a] = std::log(sa) - std::log(2 * t.tau[a]);
      worst = std::max(worst, std::abs(g[a]));
    }
    return worst;
  };

  KPoint out;
  RVec g;
  int it = 0;
  for (; it <= max_iter; ++it) {
    if (residual(s, g) <= tol) break;
    if (it == max_iter) throw NumericalError("kempf_ness: Newton did not converge");
    scaled(s, m);
    RVec h = hess_of(m), step;
    if (log_form) {
      RVec lg;
      log_residual(s, lg);
      RVec jac(static_cast<size_t>(k * k));
      for (int a = 0; a < k; ++a) {
        double sa = 0;
        for (int j = 0; j < n; ++j) sa += t.w(a, j) * m[j];
        for (int b = 0; b < k; ++b) jac[a * k + b] = 2 * h[a * k + b] / sa;
      }
      RVec rhs(k);
      for (int a = 0; a < k; ++a) rhs[a] = -lg[a];
      if (!solve_small(jac, rhs, k, step)) throw NumericalError("kempf_ness: singular Jacobian");
      double r0 = max_abs(lg), alpha = 1.0;
      for (int ls = 0; ls < 40; ++ls) {
        RVec trial(k), tg;
        for (int a = 0; a < k; ++a) trial[a] = s[a] + alpha * step[a];
        double r1 = log_residual(trial, tg);
        if (std::isfinite(r1) && (r1 < r0 || r1 <= 1e-15)) {
          s = trial;
          break;
        }
        alpha *= 0.5;
        if (ls == 39) throw NumericalError("kempf_ness: line search failed");
      }
    } else {
      RVec rhs(k);
      for (int a = 0; a < k; ++a) rhs[a] = -g[a];
      if (!solve_small(h, rhs, k, step)) throw NumericalError("kempf_ness: singular Hessian");
      double f0 = objective(s), slope = 0;
      for (int a = 0; a < k; ++a) slope += g[a] * step[a];
      double alpha = 1.0;
      for (int ls = 0; ls < 60; ++ls) {
        RVec trial(k);
        for (int a = 0; a < k; ++a) trial[a] = s[a] + alpha * step[a];
        double f1 = objective(trial);
        if (std::isfinite(f1) && f1 <= f0 + 1e-4 * alpha * slope + 1e-15 * std::abs(f0)) {
          s = trial;
          break;
        }
        alpha *= 0.5;
        if (ls == 59) throw NumericalError("kempf_ness: line search failed");
      }
    }
  }
  out.iterations = it;
  out.s = s;
  out.point.resize(n);
  for (int j = 0; j < n; ++j) out.point[j] = v[j] * std::exp(t.pair(s.data(), j));
  return out;
}

Fingerprint fingerprint(const TargetSpace& t, const CVec& v) {
  Fingerprint fp;
  const int n = t.n, k = t.k;
  fp.moduli.resize(n);
  fp.phases.assign(n, 0.0);
  double mmax = 0;
  for (int j = 0; j < n; ++j) {
    fp.moduli[j] = std::abs(v[j]);
    mmax = std::max(mmax, fp.moduli[j]);
  }
  auto usable = [&](int j) { return fp.moduli[j] > 1e-6 * mmax && fp.moduli[j] > 0; };

  std::vector<int> piv;
  if (k == 1) {
    for (int j = 0; j < n && piv.empty(); ++j)
      if (usable(j) && std::abs(t.w(0, j)) == 1) piv = {j};
  } else {
    for (int p = 0; p < n && piv.empty(); ++p)
      for (int q = p + 1; q < n && piv.empty(); ++q) {
        if (!usable(p) || !usable(q)) continue;
        int det = t.w(0, p) * t.w(1, q) - t.w(0, q) * t.w(1, p);
        if (std::abs(det) == 1) piv = {p, q};
      }
  }
  fp.pivots = piv;
  if (piv.empty()) return fp;

  // torus angle phi with arg v_j + (w^T phi)_j = 0 on the pivots
  RVec phi(k);
  if (k == 1) {
    phi[0] = -std::arg(v[piv[0]]) / t.w(0, piv[0]);
  } else {
    int p = piv[0], q = piv[1];
    double a = t.w(0, p), b = t.w(1, p), c = t.w(0, q), d = t.w(1, q);
    double rp = -std::arg(v[p]), rq = -std::arg(v[q]);
    double det = a * d - b * c;
    // [a b; c d] phi = (rp, rq)
    phi[0] = (d * rp - b * rq) / det;
    phi[1] = (-c * rp + a * rq) / det;
  }
  for (int j = 0; j < n; ++j) {
    if (!usable(j)) continue;
    double ph = std::arg(v[j]) + t.pair(phi.data(), j);
    ph = std::remainder(ph, 2 * kPi);
    fp.phases[j] = ph;
  }
  for (int j : piv) fp.phases[j] = 0.0;
  return fp;
}

Fingerprint orbit_fingerprint(const TargetSpace& t, const CVec& v) {
  return fingerprint(t, kempf_ness(t, v).point);
}

double distance(const Fingerprint& a, const Fingerprint& b) {
  if (a.moduli.size() != b.moduli.size()) throw InvalidArgument("fingerprint size mismatch");
  double acc = 0;
  for (size_t j = 0; j < a.moduli.size(); ++j) {
    double dm = a.moduli[j] - b.moduli[j];
    double mn = std::min(a.moduli[j], b.moduli[j]);
    double dphi = a.pivots == b.pivots ? std::abs(std::remainder(a.phases[j] - b.phases[j], 2 * kPi))
                                       : kPi;
    acc += dm * dm + mn * mn * dphi * dphi;
  }
  return std::sqrt(acc);
}

double smallest_eigenvalue(const RVec& m, int k) {
  if (k == 1) return m[0];
  if (k == 2) {
    double a = m[0], b = m[1], d = m[3];
    double tr = a + d, disc = std::sqrt(std::max(0.0, (a - d) * (a - d) + 4 * b * b));
    return 0.5 * (tr - disc);
  }
  throw InvalidArgument("smallest_eigenvalue: k > 2 not supported");
}

}  // namespace vortexlab::target
