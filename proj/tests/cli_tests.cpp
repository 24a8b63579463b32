// Black-box checks of the command-line tool. Runs the binary given as
// argv[1] inside a scratch directory and inspects exit codes and artefacts.

#include <cstdio>
#include <cstdlib>
#include <sys/wait.h>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "psym/io.hpp"
#include "psym/network.hpp"

namespace fs = std::filesystem;

#define REQUIRE(cond)                                                            \
  do {                                                                           \
    if (!(cond)) {                                                               \
      std::cerr << "[FAIL] " << __FILE__ << ":" << __LINE__ << "  " << #cond     \
                << "\n";                                                         \
      std::exit(1);                                                              \
    }                                                                            \
  } while (0)

namespace {

std::string cli;

struct RunOutput {
  int exit_code;
  std::string text;
};

RunOutput run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + cli + " " + args + " 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string text;
  char buf[512];
  while (std::fgets(buf, sizeof(buf), pipe)) text += buf;
  const int status = ::pclose(pipe);
  return {WEXITSTATUS(status), text};
}

std::string slurp(const std::string& path) { return psym::read_file(path); }

long line_count(const std::string& s) {
  long n = 0;
  for (char c : s)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: cli_tests <path-to-psym>\n";
    return 1;
  }
  cli = fs::absolute(argv[1]).string();

  const fs::path dir = fs::temp_directory_path() / "psym_cli_tests";
  fs::remove_all(dir);
  fs::create_directories(dir);
  REQUIRE(::chdir(dir.c_str()) == 0);

  // help works, bad flags and bad values fail without leaving files around
  REQUIRE(run("--help").exit_code == 0);
  REQUIRE(run("gen-data --system pendulum --bogus-flag 1 --out never.csv").exit_code != 0);
  REQUIRE(!fs::exists("never.csv"));
  REQUIRE(run("gen-data --system lorenz --n 3 --out never.csv").exit_code != 0);
  REQUIRE(!fs::exists("never.csv"));
  REQUIRE(run("gen-data --system pendulum --n 3 --region nonsense --out never.csv").exit_code !=
          0);
  REQUIRE(!fs::exists("never.csv"));

  // gen-data: row counts, sidecars, byte-level determinism
  REQUIRE(run("gen-data --system pendulum --n 15 --T 0.01 --h-gen 0.01 --seed 7 "
              "--out a.csv")
              .exit_code == 0);
  REQUIRE(line_count(slurp("a.csv")) == 16);
  REQUIRE(fs::exists("a.meta.json"));
  REQUIRE(fs::exists("a.config.json"));
  REQUIRE(run("gen-data --system pendulum --n 15 --T 0.01 --h-gen 0.01 --seed 7 "
              "--out b.csv")
              .exit_code == 0);
  REQUIRE(slurp("a.csv") == slurp("b.csv"));

  // a 4-dimensional system gives 8 data columns
  REQUIRE(run("gen-data --system galactic --n 10 --region -2:2 --seed 3 --out g.csv")
              .exit_code == 0);
  {
    const std::string csv = slurp("g.csv");
    const std::string first_row = csv.substr(csv.find('\n') + 1);
    long commas = 0;
    for (char c : first_row.substr(0, first_row.find('\n')))
      if (c == ',') ++commas;
    REQUIRE(commas == 7);
  }

  // PSYM_SEED provides the default seed; --seed wins over it
  REQUIRE(run("gen-data --system pendulum --n 5 --out env1.csv", "PSYM_SEED=7").exit_code == 0);
  REQUIRE(run("gen-data --system pendulum --n 5 --seed 7 --out env2.csv", "PSYM_SEED=99")
              .exit_code == 0);
  REQUIRE(run("gen-data --system pendulum --n 5 --seed 7 --out env3.csv").exit_code == 0);
  REQUIRE(slurp("env1.csv") == slurp("env3.csv"));
  REQUIRE(slurp("env2.csv") == slurp("env3.csv"));

  // train with 0 epochs writes the untouched initialisation
  REQUIRE(run("train --data a.csv --out zero.json --epochs 0 --width 8 --summands 2 "
              "--seed 11")
              .exit_code == 0);
  {
    const psym::Checkpoint cp = psym::read_checkpoint("zero.json");
    const psym::GradientNet init =
        psym::init_network(1, 8, 2, psym::ActivationKind::pade(), 11);
    REQUIRE(cp.net.theta == init.theta);
    REQUIRE(cp.system_name == "pendulum");
    const std::string hist = slurp("zero.history.csv");
    REQUIRE(hist == "epoch,loss\n");
  }

  // short training runs: distinct activations give distinct loadable nets,
  // and a repeated run reproduces the checkpoint byte for byte
  REQUIRE(run("train --data a.csv --out p.json --activation pade --epochs 3 --width 6 "
              "--summands 2 --seed 5")
              .exit_code == 0);
  REQUIRE(run("train --data a.csv --out r.json --activation relu --epochs 3 --width 6 "
              "--summands 2 --seed 5")
              .exit_code == 0);
  REQUIRE(run("train --data a.csv --out p2.json --activation pade --epochs 3 --width 6 "
              "--summands 2 --seed 5")
              .exit_code == 0);
  REQUIRE(slurp("p.json") == slurp("p2.json"));
  REQUIRE(slurp("p.json") != slurp("r.json"));
  REQUIRE(psym::read_checkpoint("p.json").net.kind.type == psym::ActivationType::Pade);
  REQUIRE(psym::read_checkpoint("r.json").net.kind.type == psym::ActivationType::Relu);

  // evaluate: the prediction-error curve starts at exactly zero
  REQUIRE(run("evaluate --checkpoint p.json --metric pred-error --y0 1,0 --horizon 0.1 "
              "--out pe.csv")
              .exit_code == 0);
  {
    const std::string pe = slurp("pe.csv");
    REQUIRE(pe.rfind("t,value\n0,0\n", 0) == 0);
    REQUIRE(fs::exists("pe.meta.json"));
    const auto meta = psym::json::parse(slurp("pe.meta.json"));
    REQUIRE(meta.at("metric") == "pred-error");
    REQUIRE(meta.at("system") == "pendulum");
    REQUIRE(meta.at("checkpoint_hash") == psym::fnv1a64_hex(slurp("p.json")));
  }

  // evaluate: repeated metric runs are byte-identical
  REQUIRE(run("evaluate --checkpoint p.json --metric traj-error --y0 1,0 --steps 500 "
              "--out t1.csv")
              .exit_code == 0);
  REQUIRE(run("evaluate --checkpoint p.json --metric traj-error --y0 1,0 --steps 500 "
              "--out t2.csv")
              .exit_code == 0);
  REQUIRE(slurp("t1.csv") == slurp("t2.csv"));

  // sympcheck: the exact rotation map reports the noise-floor diagnostic
  {
    const RunOutput out = run("sympcheck --system rotation --y 1,0 --out rot.csv");
    REQUIRE(out.exit_code == 0);
    REQUIRE(out.text.find("below noise floor") != std::string::npos);
    REQUIRE(slurp("rot.csv").find("# slope,nan") != std::string::npos);
  }

  // sympcheck on a real system fits a steep slope
  {
    const RunOutput out =
        run("sympcheck --system modified_pendulum --y 1,1 --steps 0.5,0.35,0.25 --out mp.csv");
    REQUIRE(out.exit_code == 0);
    REQUIRE(out.text.find("slope") != std::string::npos);
    const std::string csv = slurp("mp.csv");
    const auto pos = csv.find("# slope,");
    REQUIRE(pos != std::string::npos);
    const double slope = std::stod(csv.substr(pos + 8));
    REQUIRE(slope > 8.0);
  }

  // order-check emits the fitted convergence slope
  {
    const RunOutput out =
        run("order-check --system pendulum --steps 0.1,0.05,0.025 --out oc.csv");
    REQUIRE(out.exit_code == 0);
    const std::string csv = slurp("oc.csv");
    const auto pos = csv.find("# slope,");
    REQUIRE(pos != std::string::npos);
    const double slope = std::stod(csv.substr(pos + 8));
    REQUIRE(slope > 3.5);
    REQUIRE(slope < 4.5);
  }

  // repro wires the whole pipeline together
  REQUIRE(run("repro example4 --epochs 2 --out-dir rp").exit_code == 0);
  for (const char* f :
       {"rp/example4_train.csv", "rp/example4_pade.json", "rp/example4_pade.history.csv",
        "rp/example4_pade_traj.csv", "rp/example4_pade_pred.csv", "rp/example4_pade_energy.csv"})
    REQUIRE(fs::exists(f));
  REQUIRE(psym::read_checkpoint("rp/example4_pade.json").system_name == "pendulum");

  // timestamps live only in the run log
  REQUIRE(fs::exists("psym.log"));
  REQUIRE(slurp("a.csv").find(':') == std::string::npos);

  std::puts("cli_tests: all checks passed");
  return 0;
}
