#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "qha/experiments.hpp"
#include "qha/report.hpp"

namespace {

int usage(std::FILE* f) {
  std::fputs(
      "usage:\n"
      "  qha <experiment> [--config FILE] [--seed K] [--N n] [--out DIR] [--workers W]\n"
      "                   [--key VALUE | --key=VALUE ...]\n"
      "  qha list\n"
      "  qha plot --csv FILE --kind KIND --out FILE\n"
      "  qha help\n"
      "\n"
      "Runs the named experiment at N and 2N, prints each scalar with its\n"
      "convergence delta and one [PASS]/[FAIL] line per claim. With --out,\n"
      "writes report.json, meta.json, spectrum.csv and (where defined) plot.svg.\n"
      "KIND is loglog-spectrum or ratio-curve.\n"
      "\n"
      "exit codes:\n"
      "  0  experiment ran and every claim passed\n"
      "  1  usage or input error (unknown experiment/key, bad value, bad file)\n"
      "  2  validation gate failure\n"
      "  3  experiment ran but at least one claim failed\n",
      f);
  return f == stdout ? 0 : 1;
}

void print_registry(std::FILE* f) {
  std::fputs("experiments:\n", f);
  for (const auto& e : qha::experiment_registry()) {
    std::fprintf(f, "  %-20s %s\n", e.name.c_str(), e.description.c_str());
    std::fprintf(f, "  %-20s anchor: %s\n", "", e.anchor.c_str());
    std::string d;
    for (const auto& [k, v] : e.defaults) {
      d += " ";
      d += k;
      d += "=";
      d += v;
    }
    std::fprintf(f, "  %-20s defaults:%s\n", "", d.c_str());
  }
}

bool parse_int_arg(const std::string& s, int& out) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || v != std::floor(v) || std::fabs(v) > 2147483647.0)
    return false;
  out = static_cast<int>(v);
  return true;
}

bool parse_u64_arg(const std::string& s, std::uint64_t& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE) return false;
  out = v;
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) return usage(stderr);
  const std::string cmd = argv[1];
  if (cmd == "help" || cmd == "--help" || cmd == "-h") return usage(stdout);
  if (cmd == "list") {
    print_registry(stdout);
    return 0;
  }

  std::vector<std::pair<std::string, std::string>> kv;
  for (int i = 2; i < argc; ++i) {
    std::string tok = argv[i];
    if (tok.rfind("--", 0) != 0) {
      std::fprintf(stderr, "error: expected --key, got '%s'\n", tok.c_str());
      return 1;
    }
    tok = tok.substr(2);
    std::string key, value;
    if (const auto eq = tok.find('='); eq != std::string::npos) {
      key = tok.substr(0, eq);
      value = tok.substr(eq + 1);
    } else {
      key = tok;
      if (i + 1 >= argc) {
        std::fprintf(stderr, "error: missing value for --%s\n", key.c_str());
        return 1;
      }
      value = argv[++i];
    }
    if (key.empty()) {
      std::fputs("error: empty option name\n", stderr);
      return 1;
    }
    kv.emplace_back(key, value);
  }

  if (cmd == "plot") {
    std::string csv, kind, outp;
    for (const auto& [k, v] : kv) {
      if (k == "csv")
        csv = v;
      else if (k == "kind")
        kind = v;
      else if (k == "out")
        outp = v;
      else {
        std::fprintf(stderr, "error: unknown plot option --%s\n", k.c_str());
        return 1;
      }
    }
    if (csv.empty() || kind.empty() || outp.empty()) {
      std::fputs("error: plot needs --csv, --kind, and --out\n", stderr);
      return 1;
    }
    try {
      qha::render_plot_svg(qha::read_two_column_csv(csv), kind, outp);
    } catch (const std::exception& e) {
      std::fprintf(stderr, "plot error: %s\n", e.what());
      return 1;
    }
    std::printf("wrote %s\n", outp.c_str());
    return 0;
  }

  if (!qha::find_experiment(cmd)) {
    std::fprintf(stderr, "error: unknown experiment '%s'\n", cmd.c_str());
    print_registry(stderr);
    return 1;
  }

  qha::ExperimentConfig cfg;
  cfg.name = cmd;
  for (const auto& [k, v] : kv) {
    if (k == "config") {
      cfg.config_path = v;
    } else if (k == "out") {
      cfg.out_dir = v;
    } else if (k == "seed") {
      if (!parse_u64_arg(v, cfg.seed)) {
        std::fprintf(stderr, "error: bad value for --seed: '%s'\n", v.c_str());
        return 1;
      }
      cfg.has_seed = true;
    } else if (k == "N") {
      if (!parse_int_arg(v, cfg.n)) {
        std::fprintf(stderr, "error: bad value for --N: '%s'\n", v.c_str());
        return 1;
      }
      cfg.has_n = true;
    } else if (k == "workers") {
      if (!parse_int_arg(v, cfg.workers)) {
        std::fprintf(stderr, "error: bad value for --workers: '%s'\n", v.c_str());
        return 1;
      }
      cfg.has_workers = true;
    } else {
      cfg.overrides.emplace_back(k, v);
    }
  }

  try {
    const qha::ExperimentResult res = qha::run_experiment(cfg);
    const qha::ordered_json& rep = res.report;
    std::printf("experiment: %s\n", cmd.c_str());
    std::printf("  seed=%llu  N=%d  2N=%d\n",
                static_cast<unsigned long long>(rep.at("config").at("seed").get<std::uint64_t>()),
                rep.at("config").at("N").get<int>(),
                rep.at("config").at("N_doubled").get<int>());
    for (const auto& [name, entry] : rep.at("results").items()) {
      const double v = entry.at("value").get<double>();
      if (entry.contains("rel_delta"))
        std::printf("  %-26s %.8g   [2N %.8g, rel %.3g]\n", name.c_str(), v,
                    entry.at("at_2N").get<double>(), entry.at("rel_delta").get<double>());
      else
        std::printf("  %-26s %.8g\n", name.c_str(), v);
    }
    if (rep.contains("diagnostics"))
      for (const auto& [name, val] : rep.at("diagnostics").items())
        std::printf("  %-26s %s\n", name.c_str(), val.get<std::string>().c_str());
    for (const auto& [name, ok] : rep.at("pass").items()) {
      if (name == "all") continue;
      std::printf("  [%s] %s\n", ok.get<bool>() ? "PASS" : "FAIL", name.c_str());
    }
    if (!cfg.out_dir.empty()) std::printf("wrote %s/report.json\n", cfg.out_dir.c_str());
    std::printf("result: %s\n", res.all_pass ? "PASS" : "FAIL");
    return res.all_pass ? 0 : 3;
  } catch (const qha::UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const qha::GateFailure& e) {
    std::fprintf(stderr, "gate failure: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
