#include "opdyn/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "opdyn/constructions.hpp"
#include "opdyn/criteria.hpp"
#include "opdyn/dynamics.hpp"
#include "opdyn/io.hpp"
#include "opdyn/numlin.hpp"
#include "opdyn/operators.hpp"
#include "opdyn/version.hpp"

namespace opdyn::cli {

namespace {

namespace fs = std::filesystem;
using io::json;

constexpr int kExitPass = 0;
constexpr int kExitRefuted = 1;
constexpr int kExitInputError = 2;

constexpr const char* kSchemaHelp = R"(Operator spec files are JSON with a "kind" discriminator:
  {"kind":"bilateral_shift","weights":{"rule":"paper_example_1"}}
  {"kind":"bilateral_shift","weights":{"rule":"constant","value":1.0}}
  {"kind":"bilateral_shift","weights":{"rule":"table","default":1.0,"entries":[[0,2.0]]}}
  {"kind":"unilateral_shift","direction":"forward|backward","weights":{...}}
  {"kind":"diagonal","rule":{"type":"constant","value":[re,im]}}
  {"kind":"diagonal","rule":{"type":"affine","a":[re,im],"b":[re,im]}}   (lambda_j = a + b*j)
  {"kind":"diagonal","rule":{"type":"table","default":[re,im],"entries":[[j,[re,im]]]}}
  {"kind":"finite","matrix":[[[re,im],...],...]}                         (coordinates 0..n-1)
  {"kind":"jordan","mu":[re,im],"n":4}
  {"kind":"block_diagonal","offset":0,"blocks":[{"matrix":[...]},
      {"bidiagonal":{"diag":0.0,"super":2.0,"size":3,"lower":false}}]}
  {"kind":"block_diagonal","builtin":"nest","blocks":64,"transposed":false}
  {"kind":"block_diagonal","builtin":"ik_epsilon","epsilon":0.1,
      "c_rule":"linear","blocks":6,"zeroed_blocks":0}
Vector files hold one "index re im" triple per line; blank lines and
'#' comments are ignored; duplicate indices are rejected.
Weight rules: paper_example_1, paper_example_2, constant, table.
The bilateral shift convention is T e_n = w_n e_{n+1}.
Relative output paths resolve against $OPDYN_OUT_DIR when it is set.)";

fs::path resolve_out(const fs::path& p) {
  if (p.is_absolute()) return p;
  if (const char* base = std::getenv("OPDYN_OUT_DIR")) {
    return fs::path(base) / p;
  }
  return p;
}

json base_config(const std::string& command, long long seed) {
  return json{{"tool_version",
               std::string(kToolName) + " " + std::string(kToolVersion)},
              {"command", command},
              {"seed", seed}};
}

constructions::WitnessSet load_witness_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw io::ParseError(dir.string(), 0, "not a directory");
  }
  constructions::WitnessSet witnesses;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::string name = entry.path().filename().string();
    if (!name.starts_with("witness_") || !name.ends_with(".txt")) continue;
    std::string label = name.substr(8, name.size() - 12);
    if (label.empty() ||
        label.find_first_not_of("0123456789") != std::string::npos) {
      continue;
    }
    long long m = std::stoll(label);
    witnesses.emplace(m, io::read_vector_file(entry.path()));
  }
  if (witnesses.empty()) {
    throw io::ParseError(dir.string(), 0, "no witness_<m>.txt files found");
  }
  return witnesses;
}

std::map<long long, double> load_value_table(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw io::ParseError(path.string(), 0, "cannot open table");
  std::map<long long, double> table;
  std::string line;
  long long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    long long m;
    double v;
    if (!(ss >> m >> v)) {
      throw io::ParseError(path.string(), line_no, "expected 'm value'");
    }
    table[m] = v;
  }
  return table;
}

void emit_report(const criteria::CertificateReport& report, const json& config,
                 const fs::path& out_path) {
  json doc = io::report_json(report, config);
  io::atomic_write_text(resolve_out(out_path), doc.dump(2) + "\n");
  if (report.pass) {
    std::cout << "verdict: pass (" << out_path.string() << ")\n";
  } else {
    const auto& v = report.violations.front();
    std::cout << "verdict: fail; first violation: m=" << v.m << " i=" << v.i
              << " " << v.what << " required=" << io::format_double(v.required)
              << " achieved=" << io::format_double(v.achieved) << " ("
              << out_path.string() << ")\n";
  }
}

struct BuildArgs {
  std::string name;
  std::string out_dir = ".";
  int blocks = 0;  // 0 = per-construction default
  bool transposed = false;
  double epsilon = 0.1;
  std::string c_rule = "linear";
  double mu_re = 1.0;
  double mu_im = 0.0;
  long long jordan_n = 4;
};

int run_build(const BuildArgs& args, long long seed) {
  fs::path dir = resolve_out(args.out_dir);
  fs::create_directories(dir);
  json config = base_config("build", seed);
  config["name"] = args.name;
  config["out_dir"] = args.out_dir;

  if (args.name == "nest") {
    int blocks = args.blocks > 0 ? args.blocks : 64;
    auto nest = constructions::nest_block_operator(blocks, args.transposed);
    json spec = io::nest_spec_json(blocks, args.transposed);
    io::atomic_write_text(dir / "nest.json", spec.dump(2) + "\n");
    fs::path wdir = dir / "witnesses";
    for (const auto& [m, x] : nest.witnesses) {
      io::write_vector_file(wdir / ("witness_" + std::to_string(m) + ".txt"), x);
    }
    std::cout << "wrote " << (dir / "nest.json").string() << " and "
              << nest.witnesses.size() << " witness files\n";
    return kExitPass;
  }
  if (args.name == "ik_epsilon") {
    int blocks = args.blocks > 0 ? args.blocks : 4;
    auto built = constructions::build_ik_epsilon(
        args.epsilon, io::parse_c_rule(args.c_rule), blocks, args.c_rule);
    json spec =
        io::ik_epsilon_spec_json(args.epsilon, args.c_rule, blocks);
    io::atomic_write_text(dir / "ik_epsilon.json", spec.dump(2) + "\n");
    fs::path wdir = dir / "witnesses";
    std::vector<std::string> witness_files;
    for (const auto& [m, x] : built.witnesses) {
      std::string name = "witness_" + std::to_string(m) + ".txt";
      io::write_vector_file(wdir / name, x);
      witness_files.push_back("witnesses/" + name);
    }
    json manifest =
        io::manifest_json(built.params, witness_files, "ik_epsilon.json");
    manifest["config"] = config;
    io::atomic_write_text(dir / "manifest.json", manifest.dump(2) + "\n");
    std::cout << "wrote " << (dir / "manifest.json").string() << " (";
    for (const auto& b : built.params.blocks) {
      std::cout << " block " << b.i << ": eps=" << io::format_double(b.eps)
                << " L=" << b.L << " m=" << b.m << " n=" << b.n;
    }
    std::cout << " )\n";
    return kExitPass;
  }
  if (args.name == "example_shift_1" || args.name == "example_shift_2") {
    operators::WeightRule rule;
    if (args.name == "example_shift_1") {
      rule = operators::PaperExample1Rule{};
    } else {
      rule = operators::PaperExample2Rule{};
    }
    json spec = io::bilateral_shift_spec_json(rule);
    fs::path out = dir / (args.name + ".json");
    io::atomic_write_text(out, spec.dump(2) + "\n");
    std::cout << "wrote " << out.string() << "\n";
    return kExitPass;
  }
  if (args.name == "jordan") {
    json spec = io::jordan_spec_json({args.mu_re, args.mu_im}, args.jordan_n);
    fs::path out = dir / "jordan.json";
    io::atomic_write_text(out, spec.dump(2) + "\n");
    std::cout << "wrote " << out.string() << "\n";
    return kExitPass;
  }
  throw io::ParseError(args.name, 0,
                       "unknown construction (expected nest, ik_epsilon, "
                       "example_shift_1, example_shift_2, jordan)");
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{std::string(kToolName) + " " + std::string(kToolVersion) +
               " - weighted shifts, block operators, orbit statistics and "
               "chaos certificates at desk scale\n\n" + kSchemaHelp};
  app.require_subcommand(1);
  long long seed = 0;
  app.add_option("--seed", seed,
                 "seed recorded in reports (reserved for randomized runs)");

  // ---- build ----
  BuildArgs build_args;
  auto* build = app.add_subcommand(
      "build", "materialize a named construction (spec + witnesses + manifest)");
  build->add_option("name", build_args.name,
                    "nest | ik_epsilon | example_shift_1 | example_shift_2 | jordan")
      ->required();
  build->add_option("--out-dir", build_args.out_dir, "output directory");
  build->add_option("--blocks", build_args.blocks, "materialized block count");
  build->add_flag("--transposed", build_args.transposed,
                  "nest: subdiagonal variant");
  build->add_option("--epsilon", build_args.epsilon, "ik_epsilon: total norm bound");
  build->add_option("--c-rule", build_args.c_rule,
                    "ik_epsilon: linear|sqrt|table:<file>");
  build->add_option("--mu-re", build_args.mu_re, "jordan: Re(mu)");
  build->add_option("--mu-im", build_args.mu_im, "jordan: Im(mu)");
  build->add_option("--n", build_args.jordan_n, "jordan: block size");

  // ---- orbit ----
  std::string orbit_spec, orbit_vector, orbit_csv_path = "orbit.csv";
  long long orbit_steps = 100;
  auto* orbit = app.add_subcommand("orbit", "orbit norms CSV (i,norm)");
  orbit->add_option("--spec", orbit_spec, "operator spec file")->required();
  orbit->add_option("--vector", orbit_vector, "start vector file")->required();
  orbit->add_option("--steps", orbit_steps, "iterations");
  orbit->add_option("--csv", orbit_csv_path, "output CSV path");

  // ---- distfn ----
  std::string dist_spec, dist_x, dist_y, dist_csv_path = "distfn.csv",
                                         dist_summary_path = "distfn.json";
  long long dist_steps = 1000;
  std::vector<double> dist_tau;
  std::vector<long long> dist_schedule;
  auto* distfn = app.add_subcommand(
      "distfn", "distributional functions F^n(tau): CSV (n,tau,F) + JSON summary");
  distfn->add_option("--spec", dist_spec, "operator spec file")->required();
  distfn->add_option("--x", dist_x, "first vector file")->required();
  distfn->add_option("--y", dist_y, "second vector file (omit for zero)");
  distfn->add_option("--steps", dist_steps, "series length");
  distfn->add_option("--tau", dist_tau, "tau grid (default geometric 1e-4..1e2)");
  distfn->add_option("--n-schedule", dist_schedule,
                     "window schedule (default geometric 8..steps)");
  distfn->add_option("--csv", dist_csv_path, "output CSV path");
  distfn->add_option("--summary", dist_summary_path, "output JSON summary path");

  // ---- liyorke ----
  std::string ly_spec, ly_x, ly_y, ly_out = "liyorke.json";
  long long ly_steps = 1000;
  double ly_delta = 0.5, ly_eta = 0.05;
  auto* liyorke = app.add_subcommand(
      "liyorke", "windowed Li-Yorke evidence for one pair (exit 1 when it fails)");
  liyorke->add_option("--spec", ly_spec, "operator spec file")->required();
  liyorke->add_option("--x", ly_x, "first vector file")->required();
  liyorke->add_option("--y", ly_y, "second vector file (omit for zero)");
  liyorke->add_option("--steps", ly_steps, "series length");
  liyorke->add_option("--delta", ly_delta, "sup threshold");
  liyorke->add_option("--eta", ly_eta, "inf threshold");
  liyorke->add_option("--out", ly_out, "output JSON path");

  // ---- certify-nu ----
  std::string nu_spec, nu_witnesses, nu_out = "report.json";
  double nu_r = 2.0, nu_decay_tol = 1e-6;
  long long nu_horizon = 100000;
  auto* certify_nu = app.add_subcommand(
      "certify-nu", "verify a norm-unimodality certificate (exit 1 when refuted)");
  certify_nu->add_option("--spec", nu_spec, "operator spec file")->required();
  certify_nu->add_option("--r", nu_r, "claimed norm-unimodal constant")->required();
  certify_nu->add_option("--witnesses", nu_witnesses,
                         "directory of witness_<m>.txt files")->required();
  certify_nu->add_option("--decay-tol", nu_decay_tol, "decay threshold");
  certify_nu->add_option("--horizon", nu_horizon, "decay horizon");
  certify_nu->add_option("--out", nu_out, "report JSON path");

  // ---- certify-wnu ----
  std::string wnu_spec, wnu_witnesses, wnu_manifest, wnu_c_rule = "linear",
              wnu_n_rule = "manifest", wnu_targets = "manifest",
              wnu_out = "report.json";
  double wnu_decay_tol = 1e-6;
  long long wnu_horizon = 100000;
  auto* certify_wnu = app.add_subcommand(
      "certify-wnu",
      "verify a weak-criterion certificate (exit 1 when refuted)");
  certify_wnu->add_option("--spec", wnu_spec, "operator spec file")->required();
  certify_wnu->add_option("--witnesses", wnu_witnesses,
                          "directory of witness_<m>.txt files (default: from "
                          "the manifest)");
  certify_wnu->add_option("--manifest", wnu_manifest,
                          "ik_epsilon manifest.json (supplies C, N, targets, "
                          "witnesses)");
  certify_wnu->add_option("--c-rule", wnu_c_rule,
                          "linear|sqrt|table:<file>|manifest");
  certify_wnu->add_option("--n-rule", wnu_n_rule, "manifest|table:<file>");
  certify_wnu->add_option("--targets", wnu_targets,
                          "manifest (1 - L/m per block)|table:<file>");
  certify_wnu->add_option("--decay-tol", wnu_decay_tol, "decay threshold");
  certify_wnu->add_option("--horizon", wnu_horizon, "decay horizon");
  certify_wnu->add_option("--out", wnu_out, "report JSON path");

  // ---- spectrum ----
  std::string sp_spec, sp_probe, sp_csv = "rates.csv", sp_json = "spectrum.json";
  long long sp_steps = 64;
  auto* spectrum = app.add_subcommand(
      "spectrum", "Gelfand growth rates ||T^n probe||^(1/n): CSV + JSON");
  spectrum->add_option("--spec", sp_spec, "operator spec file")->required();
  spectrum->add_option("--probe", sp_probe, "probe vector file")->required();
  spectrum->add_option("--steps", sp_steps, "iterations");
  spectrum->add_option("--csv", sp_csv, "output CSV path");
  spectrum->add_option("--json", sp_json, "output JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitInputError;
  }

  try {
    if (build->parsed()) return run_build(build_args, seed);

    if (orbit->parsed()) {
      auto op = io::load_operator(orbit_spec);
      auto v = io::read_vector_file(orbit_vector);
      auto norms = operators::orbit_norms(op, v, orbit_steps);
      io::atomic_write_text(resolve_out(orbit_csv_path), io::orbit_csv(norms));
      std::cout << "wrote " << orbit_csv_path << " (" << norms.size()
                << " rows)\n";
      return kExitPass;
    }

    if (distfn->parsed()) {
      auto op = io::load_operator(dist_spec);
      auto x = io::read_vector_file(dist_x);
      auto y = dist_y.empty() ? numlin::SparseVector{}
                              : io::read_vector_file(dist_y);
      auto series = dynamics::distance_series(op, x, y, dist_steps);
      auto tau = dist_tau.empty() ? dynamics::default_tau_grid() : dist_tau;
      auto sched = dist_schedule.empty()
                       ? dynamics::default_n_schedule(dist_steps)
                       : dist_schedule;
      auto profile = dynamics::distribution_profile(series, tau, sched);
      io::atomic_write_text(resolve_out(dist_csv_path),
                            io::distfn_csv(profile));
      json config = base_config("distfn", seed);
      config["spec"] = dist_spec;
      config["x"] = dist_x;
      config["y"] = dist_y;
      config["steps"] = dist_steps;
      json summary{{"tau", profile.tau_grid},
                   {"F_lower_est", profile.F_lower_est},
                   {"F_upper_est", profile.F_upper_est},
                   {"liminf_orbit_norm_est", profile.liminf_orbit_norm_est},
                   {"window_label", profile.window_label},
                   {"config", config}};
      io::atomic_write_text(resolve_out(dist_summary_path),
                            summary.dump(2) + "\n");
      std::cout << "wrote " << dist_csv_path << " and " << dist_summary_path
                << "\n";
      return kExitPass;
    }

    if (liyorke->parsed()) {
      auto op = io::load_operator(ly_spec);
      auto x = io::read_vector_file(ly_x);
      auto y =
          ly_y.empty() ? numlin::SparseVector{} : io::read_vector_file(ly_y);
      auto series = dynamics::distance_series(op, x, y, ly_steps);
      auto evidence = dynamics::li_yorke_evidence(series, ly_delta, ly_eta);
      json config = base_config("liyorke", seed);
      config["spec"] = ly_spec;
      config["x"] = ly_x;
      config["y"] = ly_y;
      config["steps"] = ly_steps;
      config["delta"] = ly_delta;
      config["eta"] = ly_eta;
      json doc{{"pass", evidence.pass},
               {"sup_tail", evidence.sup_tail},
               {"inf_tail", evidence.inf_tail},
               {"config", config}};
      io::atomic_write_text(resolve_out(ly_out), doc.dump(2) + "\n");
      std::cout << (evidence.pass ? "pass" : "fail")
                << " sup_tail=" << io::format_double(evidence.sup_tail)
                << " inf_tail=" << io::format_double(evidence.inf_tail) << "\n";
      return evidence.pass ? kExitPass : kExitRefuted;
    }

    if (certify_nu->parsed()) {
      auto op = io::load_operator(nu_spec);
      criteria::NUCertificate cert;
      cert.r = nu_r;
      cert.witnesses = load_witness_dir(nu_witnesses);
      cert.decay_tol = nu_decay_tol;
      cert.decay_horizon = nu_horizon;
      auto report = criteria::verify_nu(op, cert);
      json config = base_config("certify-nu", seed);
      config["spec"] = nu_spec;
      config["r"] = nu_r;
      config["witnesses"] = nu_witnesses;
      config["decay_tol"] = nu_decay_tol;
      config["horizon"] = nu_horizon;
      emit_report(report, config, nu_out);
      return report.pass ? kExitPass : kExitRefuted;
    }

    if (certify_wnu->parsed()) {
      auto op = io::load_operator(wnu_spec);
      criteria::WNUCertificate cert;
      cert.decay_tol = wnu_decay_tol;
      cert.decay_horizon = wnu_horizon;

      std::optional<json> manifest;
      fs::path manifest_dir;
      if (!wnu_manifest.empty()) {
        std::ifstream in(wnu_manifest);
        if (!in) throw io::ParseError(wnu_manifest, 0, "cannot open manifest");
        manifest = json::parse(in, nullptr, true);
        manifest_dir = fs::path(wnu_manifest).parent_path();
      }

      if (!wnu_witnesses.empty()) {
        cert.witnesses = load_witness_dir(wnu_witnesses);
      } else if (manifest) {
        for (const auto& b : (*manifest).at("blocks")) {
          long long m = b.at("i").get<long long>();
          fs::path wpath =
              manifest_dir / b.at("witness").get<std::string>();
          cert.witnesses.emplace(m, io::read_vector_file(wpath));
        }
      } else {
        throw io::ParseError("certify-wnu", 0,
                             "need --witnesses or --manifest");
      }

      if (wnu_c_rule == "manifest") {
        if (!manifest) {
          throw io::ParseError("certify-wnu", 0, "--c-rule manifest needs --manifest");
        }
        for (const auto& b : (*manifest).at("blocks")) {
          cert.C[b.at("i").get<long long>()] = b.at("C").get<double>();
        }
      } else if (wnu_c_rule.starts_with("table:")) {
        cert.C = load_value_table(wnu_c_rule.substr(6));
      } else {
        auto rule = io::parse_c_rule(wnu_c_rule);
        for (const auto& [m, x] : cert.witnesses) {
          cert.C[m] = rule(static_cast<int>(m));
        }
      }

      if (wnu_n_rule == "manifest") {
        if (!manifest) {
          throw io::ParseError("certify-wnu", 0, "--n-rule manifest needs --manifest");
        }
        for (const auto& b : (*manifest).at("blocks")) {
          cert.N[b.at("i").get<long long>()] = b.at("m").get<long long>();
        }
      } else if (wnu_n_rule.starts_with("table:")) {
        for (const auto& [m, v] : load_value_table(wnu_n_rule.substr(6))) {
          cert.N[m] = static_cast<long long>(v);
        }
      } else {
        throw io::ParseError(wnu_n_rule, 0, "unknown --n-rule");
      }

      if (wnu_targets == "manifest") {
        if (!manifest) {
          throw io::ParseError("certify-wnu", 0, "--targets manifest needs --manifest");
        }
        for (const auto& b : (*manifest).at("blocks")) {
          double L = b.at("L").get<double>();
          double m = b.at("m").get<double>();
          cert.target_fractions[b.at("i").get<long long>()] = 1.0 - L / m;
        }
      } else if (wnu_targets.starts_with("table:")) {
        cert.target_fractions = load_value_table(wnu_targets.substr(6));
      } else {
        throw io::ParseError(wnu_targets, 0, "unknown --targets");
      }

      auto report = criteria::verify_wnu(op, cert);
      json config = base_config("certify-wnu", seed);
      config["spec"] = wnu_spec;
      config["witnesses"] = wnu_witnesses;
      config["manifest"] = wnu_manifest;
      config["c_rule"] = wnu_c_rule;
      config["n_rule"] = wnu_n_rule;
      config["targets"] = wnu_targets;
      config["decay_tol"] = wnu_decay_tol;
      config["horizon"] = wnu_horizon;
      emit_report(report, config, wnu_out);
      return report.pass ? kExitPass : kExitRefuted;
    }

    if (spectrum->parsed()) {
      auto op = io::load_operator(sp_spec);
      auto probe = io::read_vector_file(sp_probe);
      auto growth = criteria::spectral_growth(op, probe, sp_steps);
      io::atomic_write_text(resolve_out(sp_csv), io::rates_csv(growth.rates));
      json config = base_config("spectrum", seed);
      config["spec"] = sp_spec;
      config["probe"] = sp_probe;
      config["steps"] = sp_steps;
      json doc{{"final_rate", growth.rates.back()},
               {"triangular_exact", nullptr},
               {"materialized_scope", growth.materialized_scope},
               {"config", config}};
      if (growth.triangular_exact) doc["triangular_exact"] = *growth.triangular_exact;
      io::atomic_write_text(resolve_out(sp_json), doc.dump(2) + "\n");
      std::cout << "wrote " << sp_csv << " and " << sp_json << "\n";
      return kExitPass;
    }
  } catch (const io::ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  }
  return kExitInputError;
}

}  // namespace opdyn::cli
