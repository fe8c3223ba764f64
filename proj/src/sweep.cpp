#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "sparsedom/verify.hpp"

namespace sparsedom {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<double> parse_number_list(const std::string& s) {
  std::vector<double> out;
  std::istringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(std::stod(tok));
  }
  return out;
}

bool known_verifier(const std::string& id) {
  return id == "lemma41" || id == "carleson" || id == "fs" || id == "endpoint" ||
         id == "lp" || id == "cor14" || id == "twoweight" || id == "cor16a";
}

bool needs_two_weights(const std::string& id) {
  return id == "twoweight" || id == "cor16a";
}

}  // namespace

SweepPlan SweepPlan::parse(std::istream& in) {
  SweepPlan plan;
  std::string line;
  SweepEntry* cur = nullptr;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[' && line.back() == ']') {
      SweepEntry entry;
      entry.verifier = trim(line.substr(1, line.size() - 2));
      if (!known_verifier(entry.verifier))
        throw ParseError("unknown verifier '" + entry.verifier + "'", lineno);
      entry.corpus.two_weight = needs_two_weights(entry.verifier);
      plan.entries.push_back(std::move(entry));
      cur = &plan.entries.back();
      continue;
    }
    if (!cur) throw ParseError("key outside a [verifier] section", lineno);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", lineno);
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key == "seed")
      cur->seed = std::stoull(val);
    else if (key == "corpus") {
      cur->corpus = CorpusSpec::parse(val);
      cur->corpus.two_weight = needs_two_weights(cur->verifier);
    } else if (key == "eps" || key == "p" || key == "delta" || key == "tau")
      cur->params.emplace_back(key, parse_number_list(val));
    else
      throw ParseError("unknown key '" + key + "'", lineno);
  }
  return plan;
}

SweepPlan SweepPlan::parse_string(const std::string& text) {
  std::istringstream ss(text);
  return parse(ss);
}

SweepPlan default_sweep_plan(std::uint64_t seed) {
  std::ostringstream plan;
  plan << "[endpoint]\n"
       << "seed = " << seed << "\n"
       << "corpus = n=1,depth=8,count=80,mix=cascade,m=4\n"
       << "eps = 0.25,0.5,1\n"
       << "[endpoint]\n"
       << "seed = " << seed + 1 << "\n"
       << "corpus = n=2,depth=4,count=60,mix=standard,m=2\n"
       << "eps = 0.5\n"
       << "[lp]\n"
       << "seed = " << seed + 2 << "\n"
       << "corpus = n=1,depth=8,count=80,mix=standard,m=4\n"
       << "p = 2\n"
       << "delta = 0.25,1\n"
       << "[lp]\n"
       << "seed = " << seed + 3 << "\n"
       << "corpus = n=1,depth=6,count=40,mix=cascade,m=2\n"
       << "p = 1.25,3\n"
       << "delta = 0.5\n"
       << "[cor14]\n"
       << "seed = " << seed + 4 << "\n"
       << "corpus = n=1,depth=8,count=80,mix=cascade,m=4\n"
       << "[cor14]\n"
       << "seed = " << seed + 5 << "\n"
       << "corpus = n=2,depth=4,count=40,mix=standard,m=2\n"
       << "[twoweight]\n"
       << "seed = " << seed + 6 << "\n"
       << "corpus = n=1,depth=8,count=80,mix=standard,m=4\n"
       << "p = 2\n"
       << "delta = 0.25,1\n"
       << "[twoweight]\n"
       << "seed = " << seed + 7 << "\n"
       << "corpus = n=2,depth=4,count=40,mix=cascade,m=2\n"
       << "p = 1.5\n"
       << "delta = 1\n"
       << "[cor16a]\n"
       << "seed = " << seed + 8 << "\n"
       << "corpus = n=1,depth=7,count=70,mix=standard,m=4\n"
       << "p = 2\n"
       << "delta = 0.5,1\n"
       << "[cor16a]\n"
       << "seed = " << seed + 9 << "\n"
       << "corpus = n=1,depth=6,count=40,mix=cascade,m=2\n"
       << "p = 1.5\n"
       << "delta = 1\n";
  return SweepPlan::parse_string(plan.str());
}

namespace {

struct Task {
  const SweepEntry* entry;
  const Instance* instance;
  std::vector<std::pair<std::string, double>> point;  // one parameter point
};

std::vector<std::vector<std::pair<std::string, double>>> cross_product(
    const std::vector<std::pair<std::string, std::vector<double>>>& grids) {
  std::vector<std::vector<std::pair<std::string, double>>> points{{}};
  for (const auto& [key, values] : grids) {
    std::vector<std::vector<std::pair<std::string, double>>> next;
    for (const auto& partial : points)
      for (double v : values) {
        auto ext = partial;
        ext.emplace_back(key, v);
        next.push_back(std::move(ext));
      }
    points = std::move(next);
  }
  return points;
}

double param_or(const std::vector<std::pair<std::string, double>>& point,
                const std::string& key, double fallback) {
  for (const auto& [k, v] : point)
    if (k == key) return v;
  return fallback;
}

VerificationReport run_one(const Task& task) {
  const Instance& inst = *task.instance;
  const std::string& id = task.entry->verifier;
  VerificationReport rep;
  if (id == "lemma41") {
    rep = verify_lemma41(inst.f, inst.w, family_for(inst.f));
  } else if (id == "carleson") {
    rep = verify_carleson(family_for(inst.f), inst.w);
  } else if (id == "fs") {
    rep = verify_fs(inst.f, inst.w);
  } else if (id == "endpoint") {
    rep = verify_endpoint(inst.f, inst.w, param_or(task.point, "eps", 0.5),
                          family_for(inst.f));
  } else if (id == "lp") {
    rep = verify_lp(inst.f, inst.w, param_or(task.point, "p", 2),
                    param_or(task.point, "delta", 1), family_for(inst.f));
  } else if (id == "cor14") {
    rep = verify_cor14(inst.f, inst.w, family_for(inst.f),
                       param_or(task.point, "tau", kFrozenTau));
  } else if (id == "twoweight") {
    rep = verify_two_weight_max(inst.f, inst.w, *inst.sigma,
                                param_or(task.point, "p", 2),
                                param_or(task.point, "delta", 1));
  } else if (id == "cor16a") {
    rep = verify_cor16a(inst.f, inst.w, *inst.sigma, param_or(task.point, "p", 2),
                        param_or(task.point, "delta", 1), family_for(inst.f));
  } else {
    throw Error("unknown verifier id '" + id + "'");
  }
  rep.instance = inst.name;
  return rep;
}

int thread_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SPARSEDOM_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

}  // namespace

SweepOutcome run_sweep(const SweepPlan& plan, int threads) {
  // Materialize all corpora first so tasks can reference instances.
  std::vector<std::vector<Instance>> corpora;
  corpora.reserve(plan.entries.size());
  for (const auto& entry : plan.entries)
    corpora.push_back(corpus_generate(entry.seed, entry.corpus));

  std::vector<Task> tasks;
  for (std::size_t e = 0; e < plan.entries.size(); ++e) {
    const auto points = cross_product(plan.entries[e].params);
    for (const auto& inst : corpora[e])
      for (const auto& point : points)
        tasks.push_back({&plan.entries[e], &inst, point});
  }

  std::vector<VerificationReport> reports(tasks.size());
  const int nthreads =
      std::min(thread_count(threads), std::max(1, int(tasks.size())));
  if (nthreads <= 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) reports[i] = run_one(tasks[i]);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t)
      pool.emplace_back([&] {
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= tasks.size()) break;
          reports[i] = run_one(tasks[i]);
        }
      });
    for (auto& th : pool) th.join();
  }

  SweepOutcome out;
  std::ostringstream csv;
  csv << "verifier,instance,params,lhs,rhs,ratio,bound,pass\n";
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    VerificationReport& rep = reports[i];
    std::string params;
    for (const auto& [k, v] : rep.params) {
      if (!params.empty()) params += ';';
      params += k + "=" + format_double(v);
    }
    csv << rep.id << ',' << rep.instance << ',' << params << ','
        << format_double(rep.lhs) << ',' << format_double(rep.rhs) << ','
        << format_double(rep.ratio) << ','
        << (rep.bound ? format_double(*rep.bound) : std::string("-")) << ','
        << (rep.pass ? "1" : "0") << '\n';
    auto [it, inserted] = out.max_ratio.try_emplace(rep.id, rep.ratio);
    if (!inserted) it->second = std::max(it->second, rep.ratio);
    out.all_asserted_pass = out.all_asserted_pass && rep.pass;
    out.reports.push_back(std::move(rep));
  }
  out.csv = csv.str();
  return out;
}

std::map<std::string, double> read_baselines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open baselines file '" + path + "'");
  nlohmann::json j;
  in >> j;
  std::map<std::string, double> out;
  for (const auto& [key, value] : j.at("max_ratio").items())
    out[key] = value.get<double>();
  return out;
}

void write_baselines(const std::string& path, const std::map<std::string, double>& ratios,
                     std::uint64_t seed) {
  nlohmann::json j;
  j["version"] = 1;
  j["seed"] = seed;
  j["max_ratio"] = nlohmann::json::object();
  for (const auto& [key, value] : ratios) j["max_ratio"][key] = value;
  std::ofstream out(path);
  if (!out) throw Error("cannot open baselines file '" + path + "' for writing");
  out << j.dump(2) << '\n';
}

}  // namespace sparsedom
