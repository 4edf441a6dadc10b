#include "spinlet/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "spinlet/besov.hpp"
#include "spinlet/io.hpp"
#include "spinlet/needlet.hpp"
#include "spinlet/rng.hpp"
#include "spinlet/sht.hpp"
#include "spinlet/stochastic.hpp"

namespace spinlet::cli {

namespace {

using nlohmann::json;

constexpr double kPi = std::numbers::pi;

// ---------------------------------------------------------------------------
// Command line and config plumbing
// ---------------------------------------------------------------------------

struct Args {
  std::string command;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool oracle = false;
  std::optional<double> tolerance;
};

const char* kUsage =
    "usage: spinlet <command> [--config FILE] [--seed N] [--out PATH] [--oracle] [--tolerance X]\n"
    "commands: filter-table make-bank simulate analyze synthesize besov estimate uncorrelation clt denoise\n";

std::uint64_t parse_u64(const std::string& tok, const std::string& what) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  require(res.ec == std::errc() && res.ptr == tok.data() + tok.size(), errc::invalid_input,
          what + " expects an unsigned integer, got '" + tok + "'");
  return v;
}

double parse_double_tok(const std::string& tok, const std::string& what) {
  double v = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  require(res.ec == std::errc() && res.ptr == tok.data() + tok.size(), errc::invalid_input,
          what + " expects a number, got '" + tok + "'");
  return v;
}

Args parse_args(int argc, char** argv) {
  require(argc >= 2, errc::invalid_input, std::string("missing command\n") + kUsage);
  Args a;
  a.command = argv[1];
  for (int i = 2; i < argc; ++i) {
    const std::string flag = argv[i];
    const auto value = [&]() -> std::string {
      require(i + 1 < argc, errc::invalid_input, flag + " expects a value");
      return argv[++i];
    };
    if (flag == "--config")
      a.config_path = value();
    else if (flag == "--seed")
      a.seed = parse_u64(value(), "--seed");
    else if (flag == "--out")
      a.out = value();
    else if (flag == "--oracle")
      a.oracle = true;
    else if (flag == "--tolerance")
      a.tolerance = parse_double_tok(value(), "--tolerance");
    else
      fail(errc::invalid_input, "unknown flag '" + flag + "'\n" + kUsage);
  }
  return a;
}

// Flat key=value config with '#' comments.  Every key must be consumed by the
// subcommand; leftovers are rejected so typos cannot silently change runs.
class Config {
public:
  static Config load(const std::string& path) {
    Config c;
    if (path.empty()) return c;
    std::ifstream in(path);
    require(in.good(), errc::invalid_input, "cannot open config '" + path + "'");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const std::size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const auto first = line.find_first_not_of(" \t");
      if (first == std::string::npos) continue;
      const auto last = line.find_last_not_of(" \t");
      const std::string body = line.substr(first, last - first + 1);
      const std::size_t eq = body.find('=');
      require(eq != std::string::npos && eq > 0, errc::invalid_input,
              "config line " + std::to_string(lineno) + " is not key=value: '" + body + "'");
      std::string key = body.substr(0, eq);
      std::string val = body.substr(eq + 1);
      const auto ke = key.find_last_not_of(" \t");
      key.erase(ke + 1);
      const auto vs = val.find_first_not_of(" \t");
      val = vs == std::string::npos ? std::string() : val.substr(vs);
      require(!c.kv_.count(key), errc::invalid_input, "duplicate config key '" + key + "'");
      c.kv_[key] = val;
    }
    return c;
  }

  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  std::optional<std::string> take(const std::string& key) {
    used_.insert(key);
    const auto it = kv_.find(key);
    if (it == kv_.end()) return std::nullopt;
    return it->second;
  }

  std::string take_required(const std::string& key) {
    const auto v = take(key);
    require(v.has_value(), errc::invalid_input, "config key '" + key + "' is required");
    return *v;
  }

  std::string take_str(const std::string& key, const std::string& def) {
    const auto v = take(key);
    return v.value_or(def);
  }

  double take_double(const std::string& key, double def) {
    const auto v = take(key);
    return v ? parse_double_tok(*v, "config key '" + key + "'") : def;
  }

  long long take_int(const std::string& key, long long def) {
    const auto v = take(key);
    if (!v) return def;
    long long out = 0;
    const auto res = std::from_chars(v->data(), v->data() + v->size(), out);
    require(res.ec == std::errc() && res.ptr == v->data() + v->size(), errc::invalid_input,
            "config key '" + key + "' expects an integer, got '" + *v + "'");
    return out;
  }

  std::uint64_t take_u64(const std::string& key, std::uint64_t def) {
    const auto v = take(key);
    return v ? parse_u64(*v, "config key '" + key + "'") : def;
  }

  void finish() const {
    for (const auto& [key, value] : kv_)
      require(used_.count(key) != 0, errc::invalid_input,
              "unknown config key '" + key + "' (value '" + value + "')");
  }

private:
  std::map<std::string, std::string> kv_;
  std::set<std::string> used_;
};

// ---------------------------------------------------------------------------
// Shared pieces
// ---------------------------------------------------------------------------

NeedletBank load_bank(Config& cfg) {
  const double B = cfg.take_double("B", 2.0);
  const int spin = static_cast<int>(cfg.take_int("spin", 2));
  const int j_max = static_cast<int>(cfg.take_int("j_max", 5));
  const double eval_tol = cfg.take_double("eval_tol", 1e-12);
  return build_bank(NeedletFilter(B, eval_tol), spin, j_max);
}

// Spectra from a CSV path or from the power-law model keys.
PowerSpectra load_spectra(Config& cfg, int lmax_needed, json& summary) {
  const auto path = cfg.take("spectra");
  // Model keys are consumed either way so a config may carry both styles only
  // explicitly, not by accident.
  RegularSpectrumModel model;
  model.alpha = cfg.take_double("alpha", 2.5);
  model.amplitude = cfg.take_double("amplitude", 1.0);
  model.te_fraction = cfg.take_double("te_fraction", 0.0);
  model.tm_fraction = cfg.take_double("tm_fraction", 0.0);
  model.lmin = static_cast<int>(cfg.take_int("spectrum_lmin", 1));
  if (path) {
    const PowerSpectra s = read_spectra_csv(*path);
    require(s.lmax() >= lmax_needed, errc::truncation,
            "spectra in '" + *path + "' end at l=" + std::to_string(s.lmax()) + ", need " +
                std::to_string(lmax_needed));
    summary["spectra"] = {{"source", *path}, {"digest", file_digest(*path)}, {"lmax", s.lmax()}};
    return s;
  }
  summary["spectra"] = {{"source", "power-law"},
                        {"alpha", model.alpha},
                        {"amplitude", model.amplitude},
                        {"te_fraction", model.te_fraction},
                        {"tm_fraction", model.tm_fraction}};
  return model.generate(lmax_needed);
}

json bank_summary(const NeedletBank& bank) {
  json levels = json::array();
  for (int j = bank.j_min(); j <= bank.j_max(); ++j) {
    const auto& lev = bank.level(j);
    levels.push_back(
        {{"j", j}, {"bandlimit", lev.bandlimit}, {"n_centers", lev.grid->npoints()}});
  }
  return {{"B", bank.filter().B()},     {"spin", bank.spin()},
          {"j_min", bank.j_min()},      {"j_max", bank.j_max()},
          {"coverage_lmax", bank.coverage_lmax()}, {"levels", levels}};
}

cross_mode parse_mode(const std::string& s) {
  if (s == "te") return cross_mode::te;
  if (s == "tm") return cross_mode::tm;
  fail(errc::invalid_input, "mode must be te or tm, got '" + s + "'");
}

field_channel parse_channel(const std::string& s) {
  if (s == "t") return field_channel::t;
  if (s == "e") return field_channel::e;
  if (s == "m") return field_channel::m;
  fail(errc::invalid_input, "channel must be t, e or m, got '" + s + "'");
}

double table_l2_diff(const AlmSet& a, const AlmSet& b) {
  // Pads the smaller table with zeros; spins must agree.
  require(a.spin() == b.spin(), errc::invalid_input, "comparing tables of different spin");
  double sum = 0.0;
  const int lmax = std::max(a.lmax(), b.lmax());
  for (int l = std::abs(a.spin()); l <= lmax; ++l) {
    for (int m = -l; m <= l; ++m) {
      const std::complex<double> va = l <= a.lmax() ? a.at(l, m) : std::complex<double>(0.0);
      const std::complex<double> vb = l <= b.lmax() ? b.at(l, m) : std::complex<double>(0.0);
      sum += std::norm(va - vb);
    }
  }
  return std::sqrt(sum);
}

void emit(const json& summary, const std::optional<std::string>& json_out) {
  if (json_out) atomic_write(*json_out, summary.dump(2) + "\n");
  std::cout << summary.dump(2) << "\n";
}

// Bank matching a coefficient archive header.
NeedletBank bank_from_archive(const CoeffArchiveInfo& info, double eval_tol) {
  NeedletBank bank = build_bank(NeedletFilter(info.B, eval_tol), info.bank_spin, info.j_max);
  require(bank.j_min() == info.j_min, errc::format_error,
          "archive j_min " + std::to_string(info.j_min) + " does not match the bank's " +
              std::to_string(bank.j_min()));
  return bank;
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int cmd_filter_table(const Args& args, Config& cfg) {
  const double B = cfg.take_double("B", 2.0);
  const double eval_tol = cfg.take_double("eval_tol", 1e-12);
  const int points = static_cast<int>(cfg.take_int("points", 200));
  const double xi_min = cfg.take_double("xi_min", 1e-2);
  const double xi_max = cfg.take_double("xi_max", 1e2);
  auto out_path = args.out ? args.out : cfg.take("out");
  cfg.finish();
  require(points >= 2, errc::invalid_input, "points must be >= 2");
  require(xi_min > 0.0 && xi_max > xi_min, errc::invalid_input, "need 0 < xi_min < xi_max");

  const NeedletFilter f(B, eval_tol);
  std::string csv = "xi,phi,b,b2,partition\n";
  double max_residual = 0.0;
  const double lr = std::log(xi_max / xi_min);
  for (int i = 0; i < points; ++i) {
    const double xi = xi_min * std::exp(lr * i / (points - 1));
    const double part = f.partition_sum(xi);
    max_residual = std::max(max_residual, std::abs(part - 1.0));
    char row[256];
    std::snprintf(row, sizeof(row), "%.17g,%.17g,%.17g,%.17g,%.17g\n", xi, f.phi(xi), f.b(xi),
                  f.b2(xi), part);
    csv += row;
  }
  if (out_path) atomic_write(*out_path, csv);

  json summary{{"command", "filter-table"},
               {"B", B},
               {"points", points},
               {"xi_min", xi_min},
               {"xi_max", xi_max},
               {"max_partition_residual", max_residual}};
  if (out_path) summary["out"] = *out_path;
  if (args.tolerance)
    require(max_residual <= *args.tolerance, errc::numeric_violation,
            "partition residual " + std::to_string(max_residual) + " exceeds tolerance");
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_make_bank(const Args& args, Config& cfg) {
  const NeedletBank bank = load_bank(cfg);
  auto out_path = args.out ? args.out : cfg.take("out");
  cfg.finish();
  json summary = bank_summary(bank);
  summary["command"] = "make-bank";
  emit(summary, out_path);
  return 0;
}

int cmd_simulate(const Args& args, Config& cfg) {
  const int spin = static_cast<int>(cfg.take_int("spin", 2));
  const int lmax = static_cast<int>(cfg.take_int("lmax", 32));
  std::uint64_t seed = cfg.take_u64("seed", 0);
  if (args.seed) seed = *args.seed;
  const auto replicate = static_cast<std::uint32_t>(cfg.take_u64("replicate", 0));
  json summary{{"command", "simulate"}, {"spin", spin}, {"lmax", lmax}, {"seed", seed},
               {"replicate", replicate}};
  const PowerSpectra spectra = load_spectra(cfg, lmax, summary);
  const auto out_t = cfg.take("out_t");
  auto out_s = args.out ? args.out : cfg.take("out_s");
  cfg.finish();

  const SimulatedFields f = simulate_fields(spectra, spin, lmax, seed, replicate);
  const AlmSet composed = em_compose(f.em);
  summary["energy_t"] = f.t.energy();
  summary["energy_spin"] = composed.energy();
  if (out_t) {
    write_alm(f.t, *out_t);
    summary["out_t"] = *out_t;
  }
  if (out_s) {
    write_alm(composed, *out_s);
    summary["out_s"] = *out_s;
  }
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_analyze(const Args& args, Config& cfg) {
  const std::string field_path = cfg.take_required("field");
  const std::string kind_str = cfg.take_str("kind", "spin");
  const NeedletBank bank = load_bank(cfg);
  auto out_path = args.out ? args.out : cfg.take("out");
  cfg.finish();

  const AlmSet field = read_alm(field_path);
  NeedletCoeffs coeffs;
  if (kind_str == "spin")
    coeffs = needlet_analyze(field, bank, needlet_kind::spin);
  else if (kind_str == "mixed")
    coeffs = needlet_analyze(field, bank, needlet_kind::mixed);
  else if (kind_str == "companion")
    coeffs = analyze_companion_scalar(field, bank);
  else
    fail(errc::invalid_input, "kind must be spin, mixed or companion, got '" + kind_str + "'");

  json levels = json::array();
  for (int j = coeffs.j_min; j <= coeffs.j_max(); ++j) {
    double energy = 0.0;
    for (const auto& v : coeffs.level(j)) energy += std::norm(v);
    levels.push_back({{"j", j}, {"n_centers", coeffs.level(j).size()}, {"energy", energy}});
  }
  json summary{{"command", "analyze"},
               {"kind", kind_str},
               {"field", {{"path", field_path}, {"digest", file_digest(field_path)},
                          {"spin", field.spin()}, {"lmax", field.lmax()}}},
               {"bank", bank_summary(bank)},
               {"levels", levels},
               {"total_energy", coeffs.energy()}};

  if (args.oracle) {
    // Recheck modest levels against the plain double-sum transform.
    double worst = 0.0;
    json checked = json::array();
    for (int j = coeffs.j_min; j <= coeffs.j_max(); ++j) {
      if (bank.level(j).bandlimit > 32) continue;
      const auto ref = kind_str == "companion"
                           ? analyze_companion_scalar_level(field, bank, j, true)
                           : needlet_analyze_level(field, bank,
                                                   kind_str == "spin" ? needlet_kind::spin
                                                                      : needlet_kind::mixed,
                                                   j, true);
      const auto& fast = coeffs.level(j);
      for (std::size_t k = 0; k < ref.size(); ++k)
        worst = std::max(worst, std::abs(ref[k] - fast[k]));
      checked.push_back(j);
    }
    summary["oracle"] = {{"levels", checked}, {"max_deviation", worst}};
    const double tol = args.tolerance.value_or(1e-8);
    require(worst <= tol, errc::numeric_violation,
            "oracle deviation " + std::to_string(worst) + " exceeds tolerance");
  }

  if (out_path) {
    write_coeffs(coeffs, bank, *out_path);
    summary["out"] = *out_path;
  }
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_synthesize(const Args& args, Config& cfg) {
  const std::string coeff_path = cfg.take_required("coeffs");
  const double eval_tol = cfg.take_double("eval_tol", 1e-12);
  auto out_path = args.out ? args.out : cfg.take("out");
  cfg.finish();

  CoeffArchiveInfo info;
  const NeedletCoeffs coeffs = read_coeffs(coeff_path, &info);
  const NeedletBank bank = bank_from_archive(info, eval_tol);
  const AlmSet field = needlet_synthesize(coeffs, bank);

  json summary{{"command", "synthesize"},
               {"coeffs", {{"path", coeff_path}, {"digest", file_digest(coeff_path)}}},
               {"bank", bank_summary(bank)},
               {"spin", field.spin()},
               {"lmax", field.lmax()},
               {"energy", field.energy()}};

  if (args.oracle) {
    const AlmSet ref = needlet_synthesize(coeffs, bank, true);
    const double dev = table_l2_diff(field, ref);
    summary["oracle"] = {{"max_deviation", dev}};
    const double tol = args.tolerance.value_or(1e-8);
    require(dev <= tol, errc::numeric_violation,
            "oracle deviation " + std::to_string(dev) + " exceeds tolerance");
  }

  if (out_path) {
    write_alm(field, *out_path);
    summary["out"] = *out_path;
  }
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_besov(const Args& args, Config& cfg) {
  const std::string coeff_path = cfg.take_required("coeffs");
  BesovParams params;
  const std::string p_str = cfg.take_str("p", "2");
  params.p = p_str == "inf" ? std::numeric_limits<double>::infinity()
                            : parse_double_tok(p_str, "config key 'p'");
  params.q = cfg.take_double("q", 2.0);
  params.r = cfg.take_double("r", 1.0);
  const double eval_tol = cfg.take_double("eval_tol", 1e-12);
  auto out_path = args.out ? args.out : cfg.take("out");
  cfg.finish();

  CoeffArchiveInfo info;
  const NeedletCoeffs coeffs = read_coeffs(coeff_path, &info);
  const NeedletBank bank = bank_from_archive(info, eval_tol);
  const double norm = besov_norm(coeffs, bank, params);
  const std::vector<double> profile = level_profile(coeffs, params.p);

  json summary{{"command", "besov"},
               {"coeffs", {{"path", coeff_path}, {"digest", file_digest(coeff_path)}}},
               {"p", p_str == "inf" ? json("inf") : json(params.p)},
               {"q", params.q},
               {"r", params.r},
               {"norm", norm},
               {"level_profile", profile}};
  emit(summary, out_path);
  return 0;
}

int cmd_estimate(const Args& args, Config& cfg) {
  const std::string t_path = cfg.take_required("field_t");
  const std::string s_path = cfg.take_required("field_s");
  const NeedletBank bank = load_bank(cfg);
  json summary{{"command", "estimate"}};
  std::optional<PowerSpectra> spectra;
  const bool wants_moments = cfg.has("spectra") || cfg.has("alpha") || cfg.has("amplitude") ||
                             cfg.has("te_fraction") || cfg.has("tm_fraction");
  if (wants_moments) spectra = load_spectra(cfg, bank.level(bank.j_max()).bandlimit, summary);
  auto out_path = args.out ? args.out : cfg.take("out");
  cfg.finish();

  const AlmSet field_t = read_alm(t_path);
  const AlmSet field_s = read_alm(s_path);
  require(field_t.spin() == 0, errc::invalid_input, "field_t must be a spin-0 table");
  const NeedletCoeffs sc = needlet_analyze(field_s, bank, needlet_kind::mixed);
  const NeedletCoeffs tc = analyze_companion_scalar(field_t, bank);

  json levels = json::array();
  for (int j = bank.j_min(); j <= bank.j_max(); ++j) {
    json row{{"j", j}, {"n_centers", sc.level(j).size()}};
    for (const cross_mode mode : {cross_mode::te, cross_mode::tm}) {
      const GammaEstimate est = gamma_hat(sc, tc, j, mode);
      const char* name = mode == cross_mode::te ? "te" : "tm";
      row[name] = {{"value", est.value}};
      if (spectra) {
        const GammaMoments mom = gamma_moments(*spectra, bank, j, mode);
        row[name]["mean"] = mom.mean;
        row[name]["var"] = mom.var;
        if (mom.var > 0.0) row[name]["z"] = (est.value - mom.mean) / std::sqrt(mom.var);
      }
    }
    levels.push_back(row);
  }
  summary["bank"] = bank_summary(bank);
  summary["field_t"] = {{"path", t_path}, {"digest", file_digest(t_path)}};
  summary["field_s"] = {{"path", s_path}, {"digest", file_digest(s_path)}};
  summary["levels"] = levels;
  emit(summary, out_path);
  return 0;
}

int cmd_uncorrelation(const Args& args, Config& cfg) {
  const NeedletBank bank = load_bank(cfg);
  const std::string channel_str = cfg.take_str("channel", "e");
  const field_channel channel = parse_channel(channel_str);
  const double probe = cfg.take_double("probe_distance", 0.5);
  const std::string scaled_str = cfg.take_str("scaled_distances", "1,2,5,10,20");
  json summary{{"command", "uncorrelation"}};
  const PowerSpectra spectra = load_spectra(cfg, bank.level(bank.j_max()).bandlimit, summary);
  auto out_path = args.out ? args.out : cfg.take("out");
  cfg.finish();
  require(probe > 0.0 && probe <= kPi, errc::invalid_input, "probe_distance must lie in (0, pi]");

  std::vector<double> xs;
  {
    std::istringstream ss(scaled_str);
    std::string tok;
    while (std::getline(ss, tok, ',')) xs.push_back(parse_double_tok(tok, "scaled_distances"));
    require(!xs.empty(), errc::invalid_input, "scaled_distances is empty");
  }

  json levels = json::array();
  for (int j = bank.j_min(); j <= bank.j_max(); ++j) {
    const double bj = std::pow(bank.filter().B(), j);
    json profile = json::array();
    for (const double x : xs) {
      require(x > 0.0, errc::invalid_input, "scaled distances must be positive");
      const double d = x / bj;
      if (d > kPi) {
        profile.push_back({{"x", x}, {"d", nullptr}});
        continue;
      }
      const double corr = beta_correlation(spectra, bank, j, channel, d);
      profile.push_back({{"x", x}, {"d", d}, {"corr", corr}, {"scaled", corr * (1.0 + x) * (1.0 + x)}});
    }
    json row{{"j", j}, {"profile", profile}};
    row["corr_at_probe"] = beta_correlation(spectra, bank, j, channel, probe);
    levels.push_back(row);
  }
  summary["bank"] = bank_summary(bank);
  summary["channel"] = channel_str;
  summary["probe_distance"] = probe;
  summary["levels"] = levels;
  emit(summary, out_path);
  return 0;
}

int cmd_clt(const Args& args, Config& cfg) {
  const NeedletBank bank = load_bank(cfg);
  const int j = static_cast<int>(cfg.take_int("j", bank.j_max() - 1));
  const cross_mode mode = parse_mode(cfg.take_str("mode", "te"));
  const int reps = static_cast<int>(cfg.take_int("reps", 200));
  std::uint64_t seed = cfg.take_u64("seed", 0);
  if (args.seed) seed = *args.seed;
  json summary{{"command", "clt"}};
  const PowerSpectra spectra = load_spectra(cfg, bank.level(j).bandlimit, summary);
  auto out_path = args.out ? args.out : cfg.take("out");
  cfg.finish();

  const CltSummary clt = clt_experiment(spectra, bank, j, mode, reps, seed);
  summary["bank"] = bank_summary(bank);
  summary["j"] = j;
  summary["mode"] = mode == cross_mode::te ? "te" : "tm";
  summary["reps"] = reps;
  summary["seed"] = seed;
  summary["analytic_mean"] = clt.analytic_mean;
  summary["analytic_var"] = clt.analytic_var;
  summary["skewness"] = clt.skewness;
  summary["ex_kurtosis"] = clt.ex_kurtosis;
  emit(summary, out_path);
  return 0;
}

int cmd_denoise(const Args& args, Config& cfg) {
  const NeedletBank bank = load_bank(cfg);
  const int truth_lmax = static_cast<int>(cfg.take_int("truth_lmax",
                                                       std::min(bank.coverage_lmax(), 16)));
  const double sigma = cfg.take_double("noise_sigma", 0.05);
  const double c = cfg.take_double("c", 3.0);
  std::uint64_t seed = cfg.take_u64("seed", 0);
  if (args.seed) seed = *args.seed;
  json summary{{"command", "denoise"}};
  const PowerSpectra spectra = load_spectra(cfg, truth_lmax, summary);
  const auto grid = bank.level(bank.j_max()).grid;
  const double t_n_default = sigma * std::sqrt(4.0 * kPi / static_cast<double>(grid->npoints()));
  const double t_n = cfg.take_double("t_n", t_n_default);
  auto out_path = args.out ? args.out : cfg.take("out");
  cfg.finish();
  require(truth_lmax <= bank.coverage_lmax(), errc::invalid_input,
          "truth_lmax exceeds the bank coverage");
  require(sigma >= 0.0, errc::invalid_input, "noise_sigma must be >= 0");

  // Truth field, observations on the finest level grid with cubature weights,
  // independent complex noise per node.
  const SimulatedFields f = simulate_fields(spectra, bank.spin(), truth_lmax, seed);
  const AlmSet truth = em_compose(f.em);
  const SpinMap clean = synthesize(truth, grid);
  const Philox4x32 rng(seed);
  std::vector<Observation> obs(clean.values.size());
  std::vector<double> weights(clean.values.size());
  const double noise_scale = sigma / std::sqrt(2.0);
  for (std::size_t k = 0; k < obs.size(); ++k) {
    GaussianStream gs(rng, 0xffffffffu, static_cast<std::uint32_t>(k), 0);
    const int r = grid->ring_of(k);
    obs[k].theta = grid->theta(r);
    obs[k].phi = grid->phi(grid->phi_index_of(k));
    obs[k].value = clean.values[k] + std::complex<double>(noise_scale * gs.next(), noise_scale * gs.next());
    weights[k] = grid->point_weight(r);
  }

  const DenoiseResult res = shrink_denoise(obs, weights, bank, c, t_n);
  const AlmSet emp = empirical_alm(obs, weights, bank.spin(), bank.coverage_lmax());
  const AlmSet raw = needlet_synthesize(needlet_analyze(emp, bank, needlet_kind::mixed), bank);

  summary["bank"] = bank_summary(bank);
  summary["truth_lmax"] = truth_lmax;
  summary["n_obs"] = obs.size();
  summary["noise_sigma"] = sigma;
  summary["seed"] = seed;
  summary["threshold"] = res.threshold;
  summary["kept"] = res.kept;
  summary["total"] = res.total;
  summary["err_thresholded"] = table_l2_diff(res.alm, truth);
  summary["err_unthresholded"] = table_l2_diff(raw, truth);
  if (out_path) {
    write_alm(res.alm, *out_path);
    summary["out"] = *out_path;
  }
  std::cout << summary.dump(2) << "\n";
  return 0;
}

} // namespace

int run(int argc, char** argv) {
  try {
    const Args args = parse_args(argc, argv);
    Config cfg = Config::load(args.config_path);
    if (args.command == "filter-table") return cmd_filter_table(args, cfg);
    if (args.command == "make-bank") return cmd_make_bank(args, cfg);
    if (args.command == "simulate") return cmd_simulate(args, cfg);
    if (args.command == "analyze") return cmd_analyze(args, cfg);
    if (args.command == "synthesize") return cmd_synthesize(args, cfg);
    if (args.command == "besov") return cmd_besov(args, cfg);
    if (args.command == "estimate") return cmd_estimate(args, cfg);
    if (args.command == "uncorrelation") return cmd_uncorrelation(args, cfg);
    if (args.command == "clt") return cmd_clt(args, cfg);
    if (args.command == "denoise") return cmd_denoise(args, cfg);
    fail(errc::invalid_input, "unknown command '" + args.command + "'\n" + kUsage);
  } catch (const error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == errc::numeric_violation ? 3 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

} // namespace spinlet::cli
