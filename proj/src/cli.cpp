#include "sparsedom/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "sparsedom/maximal.hpp"
#include "sparsedom/rdf.hpp"
#include "sparsedom/verify.hpp"
#include "sparsedom/weights.hpp"

namespace sparsedom {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// All file outputs go through a temp file plus rename.
void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("cannot open '" + tmp + "' for writing");
    out << content;
    if (!out) throw Error("write to '" + tmp + "' failed");
  }
  fs::rename(tmp, path);
}

void atomic_write_function(const GridFunction& f, const std::string& path) {
  std::ostringstream ss;
  write_function(f, ss);
  atomic_write(path, ss.str());
}

json cube_to_json(const DyadicGrid& g, const Cube& q) {
  json idx = json::array();
  for (int d = 0; d < g.dim(); ++d) idx.push_back(q.idx[d]);
  return json{{"level", q.level}, {"index", idx}};
}

json grid_to_json(const DyadicGrid& g) {
  json origin = json::array();
  for (int d = 0; d < g.dim(); ++d) origin.push_back(g.origin()[d]);
  return json{{"n", g.dim()}, {"depth", g.depth()}, {"origin", origin},
              {"side", g.side()}};
}

// E(Q) as runs of lexicographic cell indices.
json e_ranges_to_json(const DyadicGrid& g, const SparseCube& sc) {
  std::vector<std::uint64_t> lex;
  const auto perm = g.lex_of_morton();
  for (const auto& [b, e] : sc.e_ranges)
    for (std::uint64_t m = b; m < e; ++m) lex.push_back(perm[m]);
  std::sort(lex.begin(), lex.end());
  json runs = json::array();
  std::size_t i = 0;
  while (i < lex.size()) {
    std::size_t j = i;
    while (j + 1 < lex.size() && lex[j + 1] == lex[j] + 1) ++j;
    runs.push_back(json::array({lex[i], lex[j] - lex[i] + 1}));
    i = j + 1;
  }
  return runs;
}

std::string family_to_json(const SparseFamily& s) {
  json j;
  j["grid"] = grid_to_json(s.grid());
  j["cubes"] = json::array();
  for (const SparseCube& sc : s.members()) {
    json c = cube_to_json(s.grid(), sc.cube);
    c["E"] = e_ranges_to_json(s.grid(), sc);
    j["cubes"].push_back(c);
  }
  return j.dump(2) + "\n";
}

SparseFamily family_from_json(const std::string& path, const DyadicGrid& expected) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open family file '" + path + "'");
  json j;
  in >> j;
  const auto& jg = j.at("grid");
  std::array<double, 3> origin{0, 0, 0};
  const auto& jo = jg.at("origin");
  for (std::size_t d = 0; d < jo.size() && d < 3; ++d) origin[d] = jo[d].get<double>();
  DyadicGrid grid(jg.at("n").get<int>(), jg.at("depth").get<int>(), origin,
                  jg.at("side").get<double>());
  if (grid != expected) throw Error("family grid does not match the function grid");
  std::vector<Cube> cubes;
  for (const auto& jc : j.at("cubes")) {
    Cube q;
    q.level = jc.at("level").get<int>();
    const auto& idx = jc.at("index");
    for (std::size_t d = 0; d < idx.size() && d < 3; ++d)
      q.idx[d] = idx[d].get<std::uint32_t>();
    cubes.push_back(q);
  }
  return SparseFamily(grid, std::move(cubes));
}

json report_to_json(const VerificationReport& rep) {
  json j = json::parse(rep.to_json_string());
  return j;
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty())
    std::cout << content;
  else
    atomic_write(out_path, content);
}

int run_parsed(const std::vector<std::string>& argv);

}  // namespace

int cli_run(const std::vector<std::string>& argv) {
  try {
    return run_parsed(argv);
  } catch (const CLI::CallForHelp&) {
    return 0;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

namespace {

int run_parsed(const std::vector<std::string>& argv) {
  CLI::App app{"sparse-operator and weighted-inequality toolkit"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a seeded corpus of DGF files");
  std::uint64_t gen_seed = 1;
  std::string gen_spec = "n=1,depth=8,count=20,mix=standard,m=4";
  std::string gen_out;
  gen->add_option("--seed", gen_seed, "corpus seed");
  gen->add_option("--spec", gen_spec, "corpus spec, key=value comma list");
  gen->add_option("--out", gen_out, "output directory")->required();

  // norm
  auto* norm = app.add_subcommand("norm", "L^p or weak L^p norm of a function");
  std::string norm_in, norm_w, norm_out;
  double norm_p = 1;
  bool norm_weak = false;
  norm->add_option("--in", norm_in, "function file")->required();
  norm->add_option("--weight", norm_w, "weight file (defaults to Lebesgue)");
  norm->add_option("--p", norm_p, "exponent");
  norm->add_flag("--weak", norm_weak, "weak norm instead of strong");
  norm->add_option("--out", norm_out, "output JSON (stdout when omitted)");

  // maximal
  auto* maximal = app.add_subcommand("maximal", "dyadic Orlicz maximal operator");
  std::string max_in, max_young = "power:p=1", max_out;
  maximal->add_option("--in", max_in, "function file")->required();
  maximal->add_option("--young", max_young, "young function spec");
  maximal->add_option("--out", max_out, "output DGF file")->required();

  // sparse
  auto* sparse = app.add_subcommand("sparse", "sparse family from CZ iteration");
  std::string sp_in, sp_out;
  double sp_lambda = 0;
  sparse->add_option("--in", sp_in, "function file")->required();
  sparse->add_option("--lambda", sp_lambda, "base CZ level")->required();
  sparse->add_option("--out", sp_out, "output family JSON")->required();

  // constants
  auto* constants = app.add_subcommand("constants", "A1/Ap/Ainfty weight constants");
  std::string c_in, c_out;
  double c_p = 2, c_tau = kFrozenTau;
  constants->add_option("--in", c_in, "weight file")->required();
  constants->add_option("--p", c_p, "Ap exponent");
  constants->add_option("--tau", c_tau, "reverse Hölder tau");
  constants->add_option("--out", c_out, "output JSON (stdout when omitted)");

  // rdf
  auto* rdf = app.add_subcommand("rdf", "Rubio de Francia iteration");
  rdf->set_help_flag("--help", "print help");  // frees -h for the input flag
  std::string r_h, r_v, r_out;
  double r_s = 2, r_tol = 1e-10;
  rdf->add_option("--h", r_h, "input h file")->required();
  rdf->add_option("--v", r_v, "weight v file")->required();
  rdf->add_option("--s", r_s, "exponent s > 1");
  rdf->add_option("--tol", r_tol, "truncation tolerance");
  rdf->add_option("--out", r_out, "output JSON (stdout when omitted)");

  // verify
  auto* verify = app.add_subcommand("verify", "run one inequality verifier");
  std::string v_id, v_f, v_w, v_u, v_sigma, v_family, v_out;
  double v_eps = 0.5, v_p = 2, v_delta = 1, v_tau = kFrozenTau, v_lambda0 = 0;
  verify->add_option("id", v_id,
                     "lemma41|carleson|fs|endpoint|lp|cor14|twoweight|cor16a")
      ->required();
  verify->add_option("--f", v_f, "data function file");
  verify->add_option("--w", v_w, "weight file");
  verify->add_option("--u", v_u, "left weight (two-weight verifiers)");
  verify->add_option("--sigma", v_sigma, "right weight (two-weight verifiers)");
  verify->add_option("--family", v_family, "sparse family JSON");
  verify->add_option("--lambda0", v_lambda0, "build family from f at this level");
  verify->add_option("--eps", v_eps, "epsilon parameter");
  verify->add_option("--p", v_p, "exponent p");
  verify->add_option("--delta", v_delta, "delta parameter");
  verify->add_option("--tau", v_tau, "reverse Hölder tau");
  verify->add_option("--out", v_out, "report JSON (stdout when omitted)");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "run verifier sweeps and baselines");
  std::string sw_plan, sw_out, sw_baselines;
  bool sw_update = false;
  std::uint64_t sw_seed = 1;
  int sw_threads = 0;
  sweep->add_option("--plan", sw_plan, "plan file (key=value sections)");
  sweep->add_option("--out", sw_out, "results CSV path");
  sweep->add_option("--baselines", sw_baselines, "baselines JSON path");
  sweep->add_flag("--update-baselines", sw_update, "write baselines from this run");
  sweep->add_option("--seed", sw_seed, "seed for the default plan");
  sweep->add_option("--threads", sw_threads, "worker threads (0: SPARSEDOM_THREADS)");

  std::vector<std::string> args(argv.rbegin(), argv.rend());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }

  if (gen->parsed()) {
    const CorpusSpec spec = CorpusSpec::parse(gen_spec);
    const auto corpus = corpus_generate(gen_seed, spec);
    fs::create_directories(gen_out);
    std::ostringstream index;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "%04zu", i);
      atomic_write_function(corpus[i].f, gen_out + "/f_" + name + ".dgf");
      atomic_write_function(corpus[i].w, gen_out + "/w_" + name + ".dgf");
      if (corpus[i].sigma)
        atomic_write_function(*corpus[i].sigma, gen_out + "/s_" + name + ".dgf");
      index << name << ' ' << corpus[i].name << '\n';
    }
    atomic_write(gen_out + "/index.txt", index.str());
    std::cout << "wrote " << corpus.size() << " instances to " << gen_out << "\n";
    return 0;
  }

  if (norm->parsed()) {
    const GridFunction f = read_function(norm_in);
    json j;
    if (norm_w.empty()) {
      if (norm_weak) {
        const GridFunction one = GridFunction::constant(f.grid(), 1.0, true);
        j["weak"] = weak_norm(f, one, norm_p);
      } else {
        j["lp"] = lp_norm(f, norm_p);
      }
    } else {
      const GridFunction w = read_function(norm_w);
      j[norm_weak ? "weak" : "lp"] =
          norm_weak ? weak_norm(f, w, norm_p) : lp_norm(f, w, norm_p);
    }
    j["p"] = norm_p;
    emit(norm_out, j.dump(2) + "\n");
    return 0;
  }

  if (maximal->parsed()) {
    const GridFunction f = read_function(max_in);
    const YoungFunction A = YoungFunction::parse(max_young);
    const MaximalResult res = orlicz_maximal(f, A);
    atomic_write_function(res.output, max_out);
    return 0;
  }

  if (sparse->parsed()) {
    const GridFunction f = read_function(sp_in);
    const SparseFamily fam = sparse_from_cz(f, sp_lambda);
    atomic_write(sp_out, family_to_json(fam));
    return 0;
  }

  if (constants->parsed()) {
    const GridFunction w = read_function(c_in);
    const ConstantResult a1 = a1_constant(w);
    const ConstantResult ap = ap_constant(w, c_p);
    const ConstantResult ainf = ainfty_constant(w);
    const ReverseHolderReport rh = reverse_holder_check(w, c_tau);
    json j;
    j["a1"] = {{"value", a1.value}, {"argmax", cube_to_json(w.grid(), a1.argmax)}};
    j["ap"] = {{"value", ap.value},
               {"p", c_p},
               {"argmax", cube_to_json(w.grid(), ap.argmax)}};
    j["ainfty"] = {{"value", ainf.value}, {"argmax", cube_to_json(w.grid(), ainf.argmax)}};
    j["reverse_holder"] = {{"tau", rh.tau},         {"r_w", rh.r_w},
                           {"max_ratio", rh.max_ratio}, {"pass", rh.pass},
                           {"minimal_tau", rh.minimal_tau}};
    emit(c_out, j.dump(2) + "\n");
    return 0;
  }

  if (rdf->parsed()) {
    const GridFunction h = read_function(r_h);
    const GridFunction v = read_function(r_v);
    const RdFResult res = rdf_build(h, v, r_s, r_tol);
    double min_gap = 0;
    for (std::uint64_t i = 0; i < h.size(); ++i)
      min_gap = std::min(min_gap, res.majorant.value(i) - h.value(i));
    json j;
    j["K"] = res.truncation;
    j["s_prime"] = res.s_norm_bound;
    j["norm_h"] = res.norm_h;
    j["norm_R"] = res.norm_r;
    j["a_majorizes"] = min_gap >= 0;
    j["b_ratio"] = res.norm_h > 0 ? res.norm_r / res.norm_h : 0;
    j["b_holds"] = res.norm_r <= 2 * res.norm_h + r_tol;
    j["c_a1"] = res.a1_of_majorant;
    j["c_ratio_to_sprime"] = res.a1_of_majorant / res.s_norm_bound;
    emit(r_out, j.dump(2) + "\n");
    return j["a_majorizes"].get<bool>() && j["b_holds"].get<bool>() ? 0 : 2;
  }

  if (verify->parsed()) {
    VerificationReport rep;
    auto family = [&](const GridFunction& f) {
      if (!v_family.empty()) return family_from_json(v_family, f.grid());
      if (v_lambda0 > 0) return sparse_from_cz(f, v_lambda0);
      return family_for(f);
    };
    if (v_id == "twoweight" || v_id == "cor16a") {
      if (v_f.empty() || v_u.empty() || v_sigma.empty())
        throw Error("verify " + v_id + ": needs --f, --u and --sigma");
      const GridFunction f = read_function(v_f);
      const GridFunction u = read_function(v_u);
      const GridFunction sigma = read_function(v_sigma);
      rep = v_id == "twoweight"
                ? verify_two_weight_max(f, u, sigma, v_p, v_delta)
                : verify_cor16a(f, u, sigma, v_p, v_delta, family(f));
    } else {
      if (v_f.empty() || v_w.empty())
        throw Error("verify " + v_id + ": needs --f and --w");
      const GridFunction f = read_function(v_f);
      const GridFunction w = read_function(v_w);
      if (v_id == "lemma41")
        rep = verify_lemma41(f, w, family(f));
      else if (v_id == "carleson")
        rep = verify_carleson(family(f), w);
      else if (v_id == "fs")
        rep = verify_fs(f, w);
      else if (v_id == "endpoint")
        rep = verify_endpoint(f, w, v_eps, family(f));
      else if (v_id == "lp")
        rep = verify_lp(f, w, v_p, v_delta, family(f));
      else if (v_id == "cor14")
        rep = verify_cor14(f, w, family(f), v_tau);
      else
        throw Error("unknown verifier id '" + v_id + "'");
    }
    emit(v_out, report_to_json(rep).dump(2) + "\n");
    return rep.pass ? 0 : 2;
  }

  if (sweep->parsed()) {
    SweepPlan plan;
    if (sw_plan.empty()) {
      plan = default_sweep_plan(sw_seed);
    } else {
      std::ifstream in(sw_plan);
      if (!in) throw Error("cannot open plan file '" + sw_plan + "'");
      plan = SweepPlan::parse(in);
    }
    const SweepOutcome outcome = run_sweep(plan, sw_threads);
    if (!sw_out.empty()) atomic_write(sw_out, outcome.csv);
    int code = outcome.all_asserted_pass ? 0 : 2;
    if (sw_update) {
      if (sw_baselines.empty()) throw Error("--update-baselines needs --baselines");
      write_baselines(sw_baselines, outcome.max_ratio, sw_seed);
      std::cout << "baselines written to " << sw_baselines << "\n";
    } else if (!sw_baselines.empty()) {
      const auto base = read_baselines(sw_baselines);
      for (const auto& [id, ratio] : outcome.max_ratio) {
        const auto it = base.find(id);
        if (it == base.end()) {
          std::cerr << "no baseline for verifier '" << id << "'\n";
          code = 2;
        } else if (ratio > it->second * 1.05) {
          std::cerr << "regression: " << id << " max ratio " << ratio
                    << " exceeds baseline " << it->second << " x 1.05\n";
          code = 2;
        }
      }
    }
    std::cout << "sweep: " << outcome.reports.size() << " reports, asserted checks "
              << (outcome.all_asserted_pass ? "pass" : "FAIL") << "\n";
    return code;
  }

  return 1;
}

}  // namespace

}  // namespace sparsedom
