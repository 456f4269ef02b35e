#pragma once

#include "fsge/error.hpp"

#include <Eigen/Core>

#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace fsge::coupling {

// Interface displacements exchanged between the fields.
using Field = Eigen::VectorXd;

enum class Scheme { GaussSeidel, Static, Aitken, IqnIls };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& name);

struct CouplingConfig {
  double omega = 0.1;
  int q = 50;
  double eps_qr = 0.1;
  double eps0 = 1e-3;
  int k_max = 100;
  int warmup_static_iters = 5;
  Scheme scheme = Scheme::IqnIls;

  void validate(const std::string& prefix = "coupling") const;
};

// Secant history of one scenario. Columns are stored newest first and are
// only formed between iterates of the same load step.
class CouplingHistory {
public:
  CouplingHistory(int q, double eps_qr) : q_(q), eps_qr_(eps_qr) {}

  // Forget the previous iterate so no column straddles two load steps.
  void begin_step() { last_.reset(); }

  // Record (r, d_tilde) of the current iterate; adds a column when a previous
  // iterate of this step exists.
  void record(const Field& d_tilde, const Field& r);

  void clear();
  int size() const { return static_cast<int>(V_.size()); }
  int q() const { return q_; }
  double eps_qr() const { return eps_qr_; }
  const std::deque<Field>& V() const { return V_; }
  const std::deque<Field>& W() const { return W_; }

  // Used by tests to build arbitrary histories.
  void push_column(const Field& dr, const Field& dd);

  // Diagonal of R from the most recent filtered QR factorization.
  const Eigen::VectorXd& last_R_diagonal() const { return last_diag_; }

private:
  friend struct IqnAccess;
  int q_;
  double eps_qr_;
  std::deque<Field> V_;
  std::deque<Field> W_;
  struct Last {
    Field d_tilde;
    Field r;
  };
  std::optional<Last> last_;
  Eigen::VectorXd last_diag_;
};

Field residual(const Field& d_tilde, const Field& d);
bool converged(const Field& r, const Field& d, double eps0);
Field static_relax(const Field& d_tilde_prev, const Field& d_prev, double omega);
double aitken_omega(double omega_prev, const Field& r_prev, const Field& r_curr);

struct IqnUpdate {
  std::optional<Field> d;  // empty when every column was filtered out
  int retained = 0;
  int filtered = 0;
};

// Adds the newest secant column, truncates to q, filters and returns
// d_tilde + W c with c the least-squares coefficients.
IqnUpdate iqnils_update(CouplingHistory& history, const Field& d_tilde_curr, const Field& r_curr);

// Polynomial predictor from the most recent converged steps (oldest first).
Field predictor(const std::vector<Field>& converged_steps, int t, Eigen::Index n);

struct IterationLog {
  int t = 0;
  int k = 0;
  std::string scheme;  // how the evaluated input was produced
  double residual_norm = 0.0;
  double rel_norm = 0.0;
  double omega = 0.0;
  int columns = 0;
};

class CouplingFailure : public Error {
public:
  CouplingFailure(const std::string& msg, std::vector<IterationLog> log)
      : Error("coupling_divergence", msg), log_(std::move(log)) {}
  const std::vector<IterationLog>& log() const { return log_; }

private:
  std::vector<IterationLog> log_;
};

using FixedPointMap = std::function<Field(const Field&)>;

struct StepResult {
  Field d;
  int iterations = 0;
  std::vector<IterationLog> log;
};

// Iterates d -> map(d) from `d_start` until the residual test passes.
StepResult couple_step(const FixedPointMap& map, const CouplingConfig& config,
                       CouplingHistory& history, int t, const Field& d_start);

}  // namespace fsge::coupling
