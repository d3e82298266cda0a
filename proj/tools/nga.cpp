// Command-line front end: verify, prove, psd-test, params, selftest.
// Exit codes: 0 accept/pass, 1 reject/fail, 2 usage or input error.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "nga/nga.hpp"

namespace {

using nlohmann::json;

constexpr int kAccept = 0;
constexpr int kReject = 1;
constexpr int kUsage = 2;

struct Config {
  std::string format = "text";
  std::string game, cert, mes, strategy, op_file, out;
  double beta = 0.0;
  double delta = 0.05;
  std::optional<int> degree;
  std::optional<double> tau;
  std::uint64_t seed_budget = 4096;
  bool early_reject = false;
  int width = 20;
  double c_sm = 1.0;
  // params
  int s = 0, t = 0, m = 2;
  double rho = 0.0, epsilon = 0.0, d_mcc = 300.0, c_D = 1.0;
  std::optional<double> copies;
  // selftest
  std::string suite = "all";
  std::optional<int> trials;
  std::uint64_t seed = 1;
};

std::ifstream open_input(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw nga::error(nga::errc::parse_error, std::string("cannot open ") + what + " '" + path + "'");
  return in;
}

nga::GameSpec load_game(const std::string& path) {
  auto in = open_input(path, "game file");
  return nga::read_game(in);
}

void emit(const Config& cfg, const json& j, const std::string& text) {
  if (cfg.format == "json") {
    json out = j;
    out["schema"] = "1";
    std::cout << out.dump(2) << '\n';
  } else {
    std::cout << text;
  }
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

json tester_json(const nga::TesterReport& r) {
  return {{"estimate", r.estimate},
          {"accept", r.accept},
          {"mode", r.mode},
          {"exact_mode", r.exact_mode},
          {"H", r.H},
          {"tau", r.tau},
          {"p", r.p},
          {"n", r.n},
          {"degree_used", r.degree_used},
          {"seeds_total_log2", r.seeds_total_log2},
          {"seeds_used_log2", r.seeds_used_log2},
          {"full_enumeration", r.full_enumeration},
          {"evaluations", r.evaluations},
          {"invariance_bound", r.invariance_bound},
          {"derandomization_bound", r.derandomization_bound},
          {"notes", r.notes}};
}

int cmd_verify(const Config& cfg) {
  const nga::GameSpec game = load_game(cfg.game);
  auto cin = open_input(cfg.cert, "certificate");
  const nga::Certificate cert = nga::read_certificate(cin);
  const nga::NoisyMES mes = nga::parse_mes(cfg.mes);
  nga::VerifyOptions opt;
  opt.delta = cfg.delta;
  opt.degree = cfg.degree;
  opt.tau_override = cfg.tau;
  opt.seed_budget = cfg.seed_budget;
  opt.early_reject = cfg.early_reject;
  const nga::VerifierReport rep = nga::verify(cert, game, mes, cfg.beta, opt);

  json j = {{"command", "verify"},
            {"accept", rep.accept},
            {"value", rep.value},
            {"beta", rep.beta},
            {"value_ok", rep.value_ok},
            {"identity_ok", rep.identity_ok},
            {"positivity_ok", rep.positivity_ok},
            {"tester_beta", rep.tester_beta},
            {"tester_delta", rep.tester_delta}};
  std::ostringstream text;
  text << (rep.accept ? "ACCEPT" : "REJECT") << '\n'
       << "value " << fmt(rep.value) << (rep.value_ok ? " >= " : " < ") << "beta " << fmt(rep.beta) << '\n'
       << "identity sums " << (rep.identity_ok ? "exact" : "violated") << '\n';
  json viol = json::array();
  const nga::IndexCodec codec = cert.codec();
  for (const auto& v : rep.identity.violations) {
    const std::string sigma = nga::io_detail::format_sigma(codec.unpack(v.key));
    viol.push_back({{"party", std::string(1, nga::party_letter(v.party))},
                    {"question", v.question},
                    {"sigma", sigma},
                    {"sum", static_cast<double>(v.sum)}});
    text << "  " << nga::party_letter(v.party) << " question " << v.question << " sigma " << sigma
         << ": numerators sum to " << static_cast<double>(v.sum) << '\n';
  }
  j["identity_violations"] = viol;
  json ops = json::array();
  text << "positivity " << (rep.positivity_ok ? "passed" : "failed") << " (beta " << fmt(rep.tester_beta)
       << ", delta " << fmt(rep.tester_delta) << ")\n";
  for (const auto& oc : rep.operators) {
    json o = {{"party", std::string(1, nga::party_letter(oc.party))},
              {"question", oc.question},
              {"answer", oc.answer},
              {"passed", oc.passed}};
    if (oc.report) o["report"] = tester_json(*oc.report);
    if (!oc.note.empty()) o["note"] = oc.note;
    ops.push_back(o);
    text << "  " << nga::party_letter(oc.party) << ' ' << oc.question << ' ' << oc.answer << ": "
         << (oc.passed ? "pass" : "fail");
    if (oc.report) text << " estimate " << fmt(oc.report->estimate) << " [" << oc.report->mode << "]";
    if (!oc.note.empty()) text << " " << oc.note;
    text << '\n';
  }
  j["operators"] = ops;
  emit(cfg, j, text.str());
  return rep.accept ? kAccept : kReject;
}

int cmd_prove(const Config& cfg) {
  const nga::GameSpec game = load_game(cfg.game);
  auto sin = open_input(cfg.strategy, "strategy file");
  const nga::ExplicitStrategy strat = nga::read_strategy(sin);
  try {
    strat.validate();
  } catch (const nga::error& e) {
    throw nga::error(nga::errc::parse_error, std::string("strategy: ") + e.what());
  }
  const nga::NoisyMES mes = nga::parse_mes(cfg.mes);
  const nga::Certificate cert = nga::honest_certificate(strat, game, mes, cfg.delta, cfg.width, cfg.c_sm);
  const double predicted = nga::game_value(cert, game, mes);
  const int t = std::max(game.t_a, game.t_b);
  const double allowance = nga::honest_allowance(strat.m, strat.D, t, cfg.delta, cfg.width);
  std::optional<double> exact;
  try {
    exact = nga::brute_force_value(strat, game, mes);
  } catch (const nga::error& e) {
    if (e.code() != nga::errc::size_limit) throw;
  }
  {
    std::ofstream out(cfg.out);
    if (!out) throw nga::error(nga::errc::parse_error, "cannot write '" + cfg.out + "'");
    nga::write_certificate(out, cert);
  }
  json j = {{"command", "prove"},
            {"certificate", cfg.out},
            {"predicted_value", predicted},
            {"allowance", allowance},
            {"degree", cert.d},
            {"width", cert.w},
            {"rho", mes.maximal_correlation()}};
  std::ostringstream text;
  text << "wrote " << cfg.out << " (degree " << cert.d << ", width " << cert.w << ")\n"
       << "certificate value " << fmt(predicted) << '\n';
  if (exact) {
    j["strategy_value"] = *exact;
    text << "strategy value " << fmt(*exact) << '\n';
  } else {
    j["strategy_value"] = nullptr;
    text << "strategy value not computed (dense budget)\n";
  }
  text << "allowance " << fmt(allowance) << '\n';
  emit(cfg, j, text.str());
  return kAccept;
}

int cmd_psd_test(const Config& cfg) {
  auto in = open_input(cfg.op_file, "operator file");
  const nga::FourierOperator op = nga::read_operator(in);
  if (op.basis_tag() != nga::kGellMannTag) {
    throw nga::error(nga::errc::basis_mismatch, "psd-test expects an operator in the '" +
                                                    std::string(nga::kGellMannTag) + "' basis");
  }
  nga::TesterParams p;
  p.beta = cfg.beta;
  p.delta = cfg.delta;
  p.d = cfg.degree ? *cfg.degree : op.degree();
  p.tau_override = cfg.tau;
  p.seed_budget = cfg.seed_budget;
  const nga::TesterReport r = nga::run_tester(op, p);
  json j = tester_json(r);
  j["command"] = "psd-test";
  j["beta"] = p.beta;
  j["delta"] = p.delta;
  std::ostringstream text;
  text << (r.accept ? "ACCEPT" : "REJECT") << '\n'
       << "estimate " << fmt(r.estimate) << " [" << r.mode << "]\n";
  for (const auto& n : r.notes) text << "note: " << n << '\n';
  emit(cfg, j, text.str());
  return r.accept ? kAccept : kReject;
}

int cmd_params(const Config& cfg) {
  nga::ParamConstants k;
  k.d_mcc = cfg.d_mcc;
  k.c_sm = cfg.c_sm;
  k.c_D = cfg.c_D;
  const nga::VerifierParams p = nga::derive_params(cfg.s, cfg.t, cfg.m, cfg.rho, cfg.epsilon, k, cfg.copies);
  json j = {{"command", "params"},
            {"eps_prime", p.eps_prime},
            {"delta", p.delta},
            {"d", p.d},
            {"d_alt", p.d_alt},
            {"log10_D", p.log10_D},
            {"D_overridden", p.D_overridden},
            {"symbolic",
             {{"eps_prime", "epsilon^2 / (4 t^3)"},
              {"delta", "eps_prime^2 / (d_mcc t (t + 1))"},
              {"d", "c_sm ln^2(1/delta) / (delta ln(1/rho))"},
              {"d_alt", "c_sm ln^2(1/delta) / (delta (1 - rho))"},
              {"w", "ceil(D log2 m + log2(2/delta))"}}}};
  // json has no infinity; very large D is reported through log10_D
  j["D"] = std::isfinite(p.D) ? json(p.D) : json(nullptr);
  j["w"] = std::isfinite(p.w) ? json(p.w) : json(nullptr);
  std::ostringstream text;
  text << "eps'    = " << fmt(p.eps_prime) << "   (epsilon^2 / (4 t^3))\n"
       << "delta   = " << fmt(p.delta) << "   (eps'^2 / (" << fmt(k.d_mcc) << " t (t + 1)))\n"
       << "d       = " << fmt(p.d) << "   (c_sm ln^2(1/delta) / (delta ln(1/rho)))\n"
       << "d (alt) = " << fmt(p.d_alt) << "   (c_sm ln^2(1/delta) / (delta (1 - rho)))\n"
       << "D       = " << (std::isfinite(p.D) ? fmt(p.D) : "inf") << "   (log10 D = " << fmt(p.log10_D)
       << (p.D_overridden ? ", user supplied" : "") << ")\n"
       << "w       = " << (std::isfinite(p.w) ? fmt(p.w) : "inf") << "   (ceil(D log2 m + log2(2/delta)))\n";
  emit(cfg, j, text.str());
  return kAccept;
}

json suite_json(const nga::SuiteReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"limit", c.limit},
                      {"detail", c.detail}});
  }
  return {{"suite", r.suite}, {"trials", r.trials}, {"seed", r.seed}, {"passed", r.passed()}, {"checks", checks}};
}

int cmd_selftest(const Config& cfg) {
  std::vector<nga::SuiteReport> reports;
  const bool all = cfg.suite == "all";
  const auto start = std::chrono::steady_clock::now();
  if (all || cfg.suite == "hyper") reports.push_back(nga::selftest_hyper(cfg.trials.value_or(1000), cfg.seed));
  if (all || cfg.suite == "invariance") reports.push_back(nga::selftest_invariance(cfg.trials.value_or(50), cfg.seed));
  if (all || cfg.suite == "derand") reports.push_back(nga::selftest_derand(cfg.trials.value_or(20), cfg.seed));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  bool ok = true;
  json suites = json::array();
  std::ostringstream text;
  for (const auto& r : reports) {
    ok = ok && r.passed();
    suites.push_back(suite_json(r));
    text << "[" << r.suite << "] " << (r.passed() ? "PASS" : "FAIL") << '\n';
    for (const auto& c : r.checks) {
      text << "  " << (c.passed ? "ok   " : "FAIL ") << c.name << ": " << fmt(c.value) << " (limit "
           << fmt(c.limit) << ")";
      if (!c.detail.empty()) text << " " << c.detail;
      text << '\n';
    }
  }
  text << "elapsed " << fmt(secs) << " s\n";
  emit(cfg, {{"command", "selftest"}, {"passed", ok}, {"suites", suites}, {"elapsed_seconds", secs}}, text.str());
  return ok ? kAccept : kReject;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlocal game certificates: verification, proving and self-tests"};
  app.require_subcommand(1);
  Config cfg;
  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", cfg.format, "Report format")->check(CLI::IsMember({"text", "json"}));
  };

  auto* verify = app.add_subcommand("verify", "Check a certificate against a game");
  verify->add_option("--game", cfg.game, "Game file (JSON)")->required();
  verify->add_option("--cert", cfg.cert, "Certificate file")->required();
  verify->add_option("--mes", cfg.mes, "State: depolarized:m=<int>,eps=<float> or file:<path>")->required();
  verify->add_option("--beta", cfg.beta, "Value threshold")->required();
  verify->add_option("--delta", cfg.delta, "Positivity slack delta (tester runs at 4 delta, 2 delta)")
      ->check(CLI::PositiveNumber);
  verify->add_option("--degree", cfg.degree, "Degree bound for the positivity tester")->check(CLI::NonNegativeNumber);
  verify->add_option("--tau", cfg.tau, "Influence threshold override")->check(CLI::PositiveNumber);
  verify->add_option("--seed-budget", cfg.seed_budget, "Largest number of seeds evaluated per operator");
  verify->add_flag("--early-reject", cfg.early_reject, "Stop at the first failed check");
  add_format(verify);

  auto* prove = app.add_subcommand("prove", "Build a certificate from an explicit strategy");
  prove->add_option("--game", cfg.game, "Game file (JSON)")->required();
  prove->add_option("--strategy", cfg.strategy, "Strategy file")->required();
  prove->add_option("--mes", cfg.mes, "State specifier")->required();
  prove->add_option("--delta", cfg.delta, "Smoothing accuracy")->check(CLI::Range(0.0, 1.0));
  prove->add_option("--width", cfg.width, "Fixed-point width w")->check(CLI::Range(0, 60));
  prove->add_option("--c-sm", cfg.c_sm, "Smoothing constant")->check(CLI::PositiveNumber);
  prove->add_option("--out", cfg.out, "Certificate output path")->required();
  add_format(prove);

  auto* psd = app.add_subcommand("psd-test", "Run the positivity tester on an operator file");
  psd->add_option("--op", cfg.op_file, "Operator file")->required();
  cfg.beta = 0.5;
  psd->add_option("--beta", cfg.beta, "Threshold beta (default 0.5)")->check(CLI::PositiveNumber);
  psd->add_option("--delta", cfg.delta, "Tolerance delta (default 0.05)")->check(CLI::PositiveNumber);
  psd->add_option("--degree", cfg.degree, "Degree bound (default: operator degree)")->check(CLI::NonNegativeNumber);
  psd->add_option("--tau", cfg.tau, "Influence threshold override")->check(CLI::PositiveNumber);
  psd->add_option("--seed-budget", cfg.seed_budget, "Largest number of seeds evaluated");
  add_format(psd);

  auto* params = app.add_subcommand("params", "Evaluate the verifier parameter formulas");
  params->add_option("--s", cfg.s, "Number of questions")->required()->check(CLI::PositiveNumber);
  params->add_option("--t", cfg.t, "Number of answers")->required()->check(CLI::PositiveNumber);
  params->add_option("--m", cfg.m, "Local dimension")->required();
  params->add_option("--rho", cfg.rho, "Maximal correlation")->required();
  params->add_option("--epsilon", cfg.epsilon, "Soundness gap")->required();
  params->add_option("--d-mcc", cfg.d_mcc, "Constant in delta (default 300)");
  params->add_option("--c-sm", cfg.c_sm, "Smoothing constant (default 1)");
  params->add_option("--c-D", cfg.c_D, "Constant in the copies bound (default 1)");
  params->add_option("--D", cfg.copies, "Use this number of copies instead of the bound");
  add_format(params);

  auto* selftest = app.add_subcommand("selftest", "Exhaustive property checks");
  selftest->add_option("suite", cfg.suite, "hyper, invariance, derand or all")
      ->check(CLI::IsMember({"hyper", "invariance", "derand", "all"}));
  selftest->add_option("--trials", cfg.trials, "Random instances per check")->check(CLI::PositiveNumber);
  selftest->add_option("--seed", cfg.seed, "Random seed");
  add_format(selftest);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*verify) return cmd_verify(cfg);
    if (*prove) return cmd_prove(cfg);
    if (*psd) return cmd_psd_test(cfg);
    if (*params) return cmd_params(cfg);
    if (*selftest) return cmd_selftest(cfg);
  } catch (const nga::error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
