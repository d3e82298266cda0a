#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nga/correlation.hpp"
#include "nga/error.hpp"
#include "nga/fourier.hpp"
#include "nga/game.hpp"
#include "nga/psd_tester.hpp"
#include "nga/summation.hpp"

namespace nga {

struct IdentityViolation {
  Party party;
  int question;
  std::uint64_t key;
  long double sum;  // as a multiple of 2^-w
};

struct IdentityCheck {
  bool ok = true;
  std::vector<IdentityViolation> violations;
};

/// For each question and sigma: sum over answers of the numerators must be
/// 2^w at sigma = 0 and 0 elsewhere. Integer arithmetic only.
inline IdentityCheck check_identity_sums(const Certificate& cert) {
  IdentityCheck out;
  const __int128 one = static_cast<__int128>(1) << cert.w;
  for (Party p : {Party::alice, Party::bob}) {
    const auto& table = cert.table(p);
    for (int q = 0; q < cert.questions(p); ++q) {
      std::map<std::uint64_t, __int128> sums;
      sums[0] = 0;
      for (const auto& [k, v] : table) {
        if (std::get<0>(k) == q) sums[std::get<2>(k)] += v;
      }
      for (const auto& [key, s] : sums) {
        const __int128 target = key == 0 ? one : 0;
        if (s != target) {
          out.ok = false;
          out.violations.push_back({p, q, key, static_cast<long double>(s)});
        }
      }
    }
  }
  return out;
}

/// sum mu V sum_sigma c_sigma P(sigma) Q(sigma), coefficients decoded from
/// fixed point and accumulated in a fixed order.
inline double game_value(const Certificate& cert, const GameSpec& game, const NoisyMES& mes) {
  if (cert.m != mes.m) throw error(errc::shape_mismatch, "certificate and state have different m");
  if (cert.s_x != game.s_x || cert.t_a != game.t_a || cert.s_y != game.s_y || cert.t_b != game.t_b) {
    throw error(errc::shape_mismatch, "certificate shape differs from the game");
  }
  std::vector<FourierOperator> P, Q;
  for (int x = 0; x < game.s_x; ++x)
    for (int a = 0; a < game.t_a; ++a) P.push_back(cert.operator_for(Party::alice, x, a, mes.basis_a.tag()));
  for (int y = 0; y < game.s_y; ++y)
    for (int b = 0; b < game.t_b; ++b) Q.push_back(cert.operator_for(Party::bob, y, b, mes.basis_b.tag()));
  std::vector<double> terms;
  for (int x = 0; x < game.s_x; ++x) {
    for (int y = 0; y < game.s_y; ++y) {
      const double mu = game.prob(x, y);
      if (mu == 0.0) continue;
      for (int a = 0; a < game.t_a; ++a) {
        for (int b = 0; b < game.t_b; ++b) {
          if (!game.win(x, y, a, b)) continue;
          terms.push_back(mu * pair_expectation(P[static_cast<std::size_t>(x * game.t_a + a)],
                                                Q[static_cast<std::size_t>(y * game.t_b + b)], mes));
        }
      }
    }
  }
  return pairwise_sum(terms);
}

struct ParamConstants {
  double d_mcc = 300.0;
  double c_sm = 1.0;
  double c_D = 1.0;
};

struct VerifierParams {
  double epsilon = 0.0;
  double rho = 0.0;
  int s = 0, t = 0, m = 2;
  ParamConstants constants;
  double eps_prime = 0.0;
  double delta = 0.0;
  double d = 0.0;      // c_sm ln^2(1/delta) / (delta ln(1/rho))
  double d_alt = 0.0;  // c_sm ln^2(1/delta) / (delta (1 - rho))
  double log10_D = 0.0;
  double D = 0.0;  // may overflow to inf
  bool D_overridden = false;
  double w = 0.0;  // ceil(D log2 m + log2(2/delta))
};

/// Number of copies bound with eps replaced by eps/2:
/// c_D s^12 t^120 / eps^48 * exp(600 t^9 ln m / (eps^4 (1 - rho)) ln^2(t / (eps (1 - rho)))).
inline double log10_copies_bound(int s, int t, int m, double rho, double eps, double c_D) {
  const double e = eps / 2.0;
  const double ln_val = std::log(c_D) + 12.0 * std::log(s) + 120.0 * std::log(t) - 48.0 * std::log(e) +
                        600.0 * std::pow(t, 9.0) * std::log(static_cast<double>(m)) /
                            (std::pow(e, 4.0) * (1.0 - rho)) *
                            std::pow(std::log(t / (e * (1.0 - rho))), 2.0);
  return ln_val / std::log(10.0);
}

inline VerifierParams derive_params(int s, int t, int m, double rho, double epsilon,
                                    ParamConstants constants = {},
                                    std::optional<double> D_override = std::nullopt) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw error(errc::invalid_parameter, "epsilon must lie in (0, 1)");
  if (!(rho > 0.0 && rho < 1.0)) throw error(errc::invalid_parameter, "rho must lie in (0, 1)");
  if (s < 1 || t < 1 || m < 2) throw error(errc::invalid_parameter, "need s, t >= 1 and m >= 2");
  if (!(constants.d_mcc > 0.0 && constants.c_sm > 0.0 && constants.c_D > 0.0)) {
    throw error(errc::invalid_parameter, "constants must be positive");
  }
  VerifierParams p;
  p.epsilon = epsilon;
  p.rho = rho;
  p.s = s;
  p.t = t;
  p.m = m;
  p.constants = constants;
  p.eps_prime = epsilon * epsilon / (4.0 * t * t * static_cast<double>(t));
  p.delta = p.eps_prime * p.eps_prime / (constants.d_mcc * t * (t + 1.0));
  const double l = std::log(1.0 / p.delta);
  p.d = constants.c_sm * l * l / (p.delta * std::log(1.0 / rho));
  p.d_alt = constants.c_sm * l * l / (p.delta * (1.0 - rho));
  if (D_override) {
    if (!(*D_override >= 1.0)) throw error(errc::invalid_parameter, "D must be >= 1");
    p.D = *D_override;
    p.log10_D = std::log10(p.D);
    p.D_overridden = true;
  } else {
    p.log10_D = log10_copies_bound(s, t, m, rho, epsilon, constants.c_D);
    p.D = std::pow(10.0, p.log10_D);
  }
  p.w = std::ceil(p.D * std::log2(static_cast<double>(m)) + std::log2(2.0 / p.delta));
  return p;
}

struct OperatorCheck {
  Party party;
  int question;
  int answer;
  bool passed = false;
  std::optional<TesterReport> report;
  std::string note;
};

struct VerifyOptions {
  double delta = 0.0;
  std::optional<int> degree;  // defaults to the certificate's d
  std::optional<double> tau_override;
  std::uint64_t seed_budget = 4096;
  bool early_reject = false;
};

struct VerifierReport {
  double value = 0.0;
  double beta = 0.0;
  bool value_ok = false;
  bool identity_ok = false;
  bool positivity_ok = false;
  bool accept = false;
  IdentityCheck identity;
  std::vector<OperatorCheck> operators;
  double tester_beta = 0.0;
  double tester_delta = 0.0;
};

/// Value >= beta, exact identity sums, and every operator passes the
/// positivity tester with (beta, delta) <- (4 delta, 2 delta). An operator
/// whose squared 2-norm exceeds 1 violates the tester precondition and fails.
inline VerifierReport verify(Certificate cert, const GameSpec& game, const NoisyMES& mes, double beta,
                             const VerifyOptions& opt) {
  if (!(opt.delta > 0.0)) throw error(errc::invalid_parameter, "delta must be positive");
  game.validate();
  cert.validate();
  cert.conform(game);
  VerifierReport rep;
  rep.beta = beta;
  rep.value = game_value(cert, game, mes);
  rep.value_ok = rep.value >= beta;
  rep.identity = check_identity_sums(cert);
  rep.identity_ok = rep.identity.ok;
  rep.tester_beta = 4.0 * opt.delta;
  rep.tester_delta = 2.0 * opt.delta;
  if (opt.early_reject && !(rep.value_ok && rep.identity_ok)) {
    rep.positivity_ok = false;
    rep.accept = false;
    return rep;
  }
  TesterParams tp;
  tp.beta = rep.tester_beta;
  tp.delta = rep.tester_delta;
  tp.d = opt.degree ? *opt.degree : cert.d;
  tp.tau_override = opt.tau_override;
  tp.seed_budget = opt.seed_budget;
  rep.positivity_ok = true;
  for (Party p : {Party::alice, Party::bob}) {
    const StandardBasis& basis = p == Party::alice ? mes.basis_a : mes.basis_b;
    for (int q = 0; q < cert.questions(p); ++q) {
      for (int a = 0; a < cert.answers(p); ++a) {
        OperatorCheck oc{p, q, a};
        const FourierOperator op = cert.operator_for(p, q, a, basis.tag());
        try {
          oc.report = run_tester(op, tp, basis);
          oc.passed = oc.report->accept;
        } catch (const error& e) {
          if (e.code() != errc::normalization) throw;
          oc.passed = false;
          oc.note = e.what();
        }
        rep.positivity_ok = rep.positivity_ok && oc.passed;
        rep.operators.push_back(std::move(oc));
        if (opt.early_reject && !rep.positivity_ok) break;
      }
      if (opt.early_reject && !rep.positivity_ok) break;
    }
    if (opt.early_reject && !rep.positivity_ok) break;
  }
  rep.accept = rep.value_ok && rep.identity_ok && rep.positivity_ok;
  return rep;
}

}  // namespace nga
