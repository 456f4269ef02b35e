#include "fsge/coupling.hpp"

#include <Eigen/QR>

#include <cmath>
#include <limits>
#include <optional>
#include <utility>

namespace fsge::coupling {

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::GaussSeidel: return "gauss_seidel";
    case Scheme::Static: return "static";
    case Scheme::Aitken: return "aitken";
    case Scheme::IqnIls: return "iqn_ils";
  }
  return "unknown";
}

Scheme scheme_from_string(const std::string& name) {
  if (name == "gauss_seidel") return Scheme::GaussSeidel;
  if (name == "static") return Scheme::Static;
  if (name == "aitken") return Scheme::Aitken;
  if (name == "iqn_ils") return Scheme::IqnIls;
  throw InvalidParameter("coupling.scheme", "unknown scheme '" + name +
                                                "' (gauss_seidel, static, aitken, iqn_ils)");
}

void CouplingConfig::validate(const std::string& prefix) const {
  if (!(omega > 0.0 && omega <= 1.0)) throw InvalidParameter(prefix + ".omega", "must lie in (0, 1]");
  if (q < 1) throw InvalidParameter(prefix + ".q", "must be >= 1");
  if (!(eps_qr >= 0.0)) throw InvalidParameter(prefix + ".eps_qr", "must be >= 0");
  if (!(eps0 > 0.0)) throw InvalidParameter(prefix + ".eps0", "must be > 0");
  if (k_max < 1) throw InvalidParameter(prefix + ".k_max", "must be >= 1");
  if (warmup_static_iters < 0) throw InvalidParameter(prefix + ".warmup_static_iters", "must be >= 0");
}

void CouplingHistory::push_column(const Field& dr, const Field& dd) {
  V_.push_front(dr);
  W_.push_front(dd);
  while (static_cast<int>(V_.size()) > q_) {
    V_.pop_back();
    W_.pop_back();
  }
}

void CouplingHistory::record(const Field& d_tilde, const Field& r) {
  if (last_) push_column(r - last_->r, d_tilde - last_->d_tilde);
  last_ = Last{d_tilde, r};
}

void CouplingHistory::clear() {
  V_.clear();
  W_.clear();
  last_.reset();
  last_diag_.resize(0);
}

Field residual(const Field& d_tilde, const Field& d) {
  if (d_tilde.size() != d.size()) throw InvalidParameter("interface", "field length mismatch");
  return d_tilde - d;
}

bool converged(const Field& r, const Field& d, double eps0) {
  const double dn = d.norm();
  if (dn == 0.0) return r.norm() < eps0;
  return r.norm() < eps0 * dn;
}

Field static_relax(const Field& d_tilde_prev, const Field& d_prev, double omega) {
  if (!(omega > 0.0 && omega <= 1.0)) throw InvalidParameter("omega", "must lie in (0, 1]");
  if (omega == 1.0) return d_tilde_prev;
  return omega * d_tilde_prev + (1.0 - omega) * d_prev;
}

double aitken_omega(double omega_prev, const Field& r_prev, const Field& r_curr) {
  const Field dr = r_curr - r_prev;
  const double n2 = dr.squaredNorm();
  if (std::sqrt(n2) < 1e-14) {
    throw ConvergenceFailure("aitken_stagnation", "residual increment vanished");
  }
  return -omega_prev * r_prev.dot(dr) / n2;
}

struct IqnAccess {
  static IqnUpdate update(CouplingHistory& h, const Field& d_tilde, const Field& r) {
    h.record(d_tilde, r);
    IqnUpdate out;
    // Columns are scaled to unit length before the QR so the filter judges
    // linear dependence, not magnitude; the solution is scale invariant.
    for (;;) {
      const int m = h.size();
      if (m == 0) {
        h.last_diag_.resize(0);
        return out;
      }
      const Eigen::Index n = r.size();
      Eigen::MatrixXd V(n, m);
      Eigen::VectorXd scale(m);
      for (int i = 0; i < m; ++i) {
        const double s = h.V_[i].norm();
        scale[i] = s > 0.0 ? 1.0 / s : 0.0;
        V.col(i) = h.V_[i] * scale[i];
      }
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(V);
      const Eigen::MatrixXd& QR = qr.matrixQR();
      std::vector<int> drop;
      // Columns beyond the field length are necessarily dependent.
      for (int i = 0; i < m; ++i) {
        if (i >= n || !(std::abs(QR(i, i)) >= h.eps_qr_)) drop.push_back(i);
      }
      if (!drop.empty()) {
        for (auto it = drop.rbegin(); it != drop.rend(); ++it) {
          h.V_.erase(h.V_.begin() + *it);
          h.W_.erase(h.W_.begin() + *it);
        }
        out.filtered += static_cast<int>(drop.size());
        continue;
      }
      h.last_diag_ = QR.diagonal().head(m);
      const Eigen::VectorXd qtr = (qr.householderQ().adjoint() * r).head(m);
      const Eigen::VectorXd c =
          QR.topLeftCorner(m, m).triangularView<Eigen::Upper>().solve(-qtr);
      Field d = d_tilde;
      for (int i = 0; i < m; ++i) d += h.W_[i] * (c[i] * scale[i]);
      out.d = std::move(d);
      out.retained = m;
      return out;
    }
  }
};

IqnUpdate iqnils_update(CouplingHistory& history, const Field& d_tilde_curr, const Field& r_curr) {
  return IqnAccess::update(history, d_tilde_curr, r_curr);
}

Field predictor(const std::vector<Field>& converged_steps, int t, Eigen::Index n) {
  if (t == 0 || converged_steps.empty()) return Field::Zero(n);
  const Field& d1 = converged_steps.back();
  if (converged_steps.size() == 1) return d1;
  const Field& d0 = converged_steps[converged_steps.size() - 2];
  return 2.0 * d1 - d0;
}

StepResult couple_step(const FixedPointMap& map, const CouplingConfig& config,
                       CouplingHistory& history, int t, const Field& d_start) {
  config.validate();
  StepResult res;
  history.begin_step();
  Field d = d_start;
  std::string how = "predictor";
  double how_omega = 0.0;
  int how_columns = 0;
  double omega_aitken = config.omega;
  Field r_prev;

  // Last input the map accepted, with its output.
  std::optional<std::pair<Field, Field>> good;

  for (int k = 1;; ++k) {
    Field d_tilde;
    try {
      d_tilde = map(d);
    } catch (const CouplingFailure&) {
      throw;
    } catch (const Error&) {
      // An extrapolated input left the admissible range (e.g. a collapsed
      // lumen). Restart from the last accepted iterate with a relaxed step.
      if (!good || k >= config.k_max) throw;
      const double nan = std::numeric_limits<double>::quiet_NaN();
      res.log.push_back({t, k, how, nan, nan, how_omega, how_columns});
      history.clear();
      d = static_relax(good->second, good->first, config.omega);
      how = "restart";
      how_omega = config.omega;
      how_columns = 0;
      r_prev.resize(0);
      continue;
    }
    if (d_tilde.size() != d.size()) throw InvalidParameter("interface", "map changed the field length");
    good.emplace(d, d_tilde);
    const Field r = residual(d_tilde, d);
    const double rn = r.norm();
    const double dn = d.norm();
    res.log.push_back({t, k, how, rn, dn > 0.0 ? rn / dn : rn, how_omega, how_columns});
    if (!std::isfinite(rn)) throw CouplingFailure("interface residual is not finite", res.log);
    if (converged(r, d, config.eps0)) {
      res.d = d;
      res.iterations = k;
      return res;
    }
    if (k >= config.k_max) {
      throw CouplingFailure("coupling did not converge in " + std::to_string(config.k_max) +
                                " iterations at load step " + std::to_string(t),
                            res.log);
    }

    Field next;
    how_columns = 0;
    const Scheme scheme = (t == 0) ? Scheme::GaussSeidel : config.scheme;
    switch (scheme) {
      case Scheme::GaussSeidel:
        next = d_tilde;
        how = "gauss_seidel";
        how_omega = 1.0;
        break;
      case Scheme::Static:
        next = static_relax(d_tilde, d, config.omega);
        how = "static";
        how_omega = config.omega;
        break;
      case Scheme::Aitken:
        if (r_prev.size() == r.size()) {
          try {
            omega_aitken = aitken_omega(omega_aitken, r_prev, r);
          } catch (const ConvergenceFailure&) {
            // keep the previous factor
          }
        } else {
          omega_aitken = config.omega;
        }
        next = d + omega_aitken * r;
        how = "aitken";
        how_omega = omega_aitken;
        break;
      case Scheme::IqnIls: {
        const bool warmup = (k == 1) || (t == 1 && k <= config.warmup_static_iters);
        if (warmup) {
          history.record(d_tilde, r);
          next = static_relax(d_tilde, d, config.omega);
          how = "static";
          how_omega = config.omega;
        } else {
          IqnUpdate up = iqnils_update(history, d_tilde, r);
          if (up.d) {
            next = std::move(*up.d);
            how = "iqn_ils";
            how_omega = 0.0;
            how_columns = up.retained;
          } else {
            next = static_relax(d_tilde, d, config.omega);
            how = "static_fallback";
            how_omega = config.omega;
          }
        }
        break;
      }
    }
    r_prev = r;
    d = std::move(next);
  }
}

}  // namespace fsge::coupling
